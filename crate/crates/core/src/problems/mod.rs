//! Vector-valued objectives with analytic derivatives, plus the built-in examples.

mod check;
mod examples;
mod registry;

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::continuation::MinorSelection;

pub use check::{check_constraint_derivatives, check_derivatives, sample_points, DerivativeReport};
pub use examples::{sphere_constraint, SphereConstraint};
pub use registry::{registry_entries, registry_get, RegistryEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("problem `{0}` is constrained and needs a manifold mesh")]
    ConstrainedOnly(String),
}

/// Values, Jacobian (`m x n`) and per-objective Hessians (`n x n`) at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub values: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub hessians: Vec<DMatrix<f64>>,
}

/// A smooth map `u: W -> R^m` on a box `W` of `R^n`, to be maximized.
pub trait VectorProblem: Send + Sync {
    fn name(&self) -> &str;
    /// Input dimension.
    fn n(&self) -> usize;
    /// Number of objectives.
    fn m(&self) -> usize;
    fn domain(&self) -> &[(f64, f64)];
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    /// Analytic Hessians, or `None` when only first derivatives are known.
    fn hessians(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>>;

    fn minor_selection(&self) -> MinorSelection {
        MinorSelection::sliding(self.n(), self.m().min(self.n()))
    }

    /// Diagonal of the domain box.
    fn diagonal(&self) -> f64 {
        self.domain().iter().map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}

type DerivFn = dyn Fn(&[f64]) -> Derivatives + Send + Sync;

/// A problem given by one closure producing all derivatives at once.
pub struct AnalyticProblem {
    name: String,
    n: usize,
    m: usize,
    domain: Vec<(f64, f64)>,
    selection: MinorSelection,
    has_hessians: bool,
    derivs: Box<DerivFn>,
}

impl AnalyticProblem {
    pub fn new(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        m: usize,
        derivs: impl Fn(&[f64]) -> Derivatives + Send + Sync + 'static,
    ) -> Self {
        let n = domain.len();
        AnalyticProblem {
            name: name.into(),
            n,
            m,
            selection: MinorSelection::sliding(n, m.min(n)),
            domain,
            has_hessians: true,
            derivs: Box::new(derivs),
        }
    }

    pub fn with_selection(mut self, selection: MinorSelection) -> Self {
        self.selection = selection;
        self
    }

    /// Hides the Hessians so that callers must fall back to finite differences.
    pub fn without_hessians(mut self) -> Self {
        self.has_hessians = false;
        self
    }

    pub fn derivatives(&self, x: &[f64]) -> Derivatives {
        (self.derivs)(x)
    }
}

impl VectorProblem for AnalyticProblem {
    fn name(&self) -> &str {
        &self.name
    }
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.derivs)(x).values
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (self.derivs)(x).jacobian
    }
    fn hessians(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        self.has_hessians.then(|| (self.derivs)(x).hessians)
    }
    fn minor_selection(&self) -> MinorSelection {
        self.selection.clone()
    }
}

/// Equality constraints `g: R^n -> R^k` with Jacobian `Dg` (`k x n`).
pub trait EqualityConstraint: Send + Sync {
    fn count(&self) -> usize;
    fn value(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
}

/// Objectives restricted to the manifold `{g = 0}`.
#[derive(Clone)]
pub struct ConstrainedProblem {
    pub base: Arc<dyn VectorProblem>,
    pub constraint: Arc<dyn EqualityConstraint>,
}

impl ConstrainedProblem {
    pub fn name(&self) -> &str {
        self.base.name()
    }

    /// Dimension of the manifold, `n - k`.
    pub fn manifold_dim(&self) -> usize {
        self.base.n() - self.constraint.count()
    }
}

/// Either kind of registered problem.
#[derive(Clone)]
pub enum Problem {
    Unconstrained(Arc<dyn VectorProblem>),
    Constrained(ConstrainedProblem),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::Unconstrained(p) => p.name(),
            Problem::Constrained(c) => c.name(),
        }
    }

    pub fn base(&self) -> &dyn VectorProblem {
        match self {
            Problem::Unconstrained(p) => p.as_ref(),
            Problem::Constrained(c) => c.base.as_ref(),
        }
    }

    pub fn unconstrained(&self) -> Result<Arc<dyn VectorProblem>, ProblemError> {
        match self {
            Problem::Unconstrained(p) => Ok(p.clone()),
            Problem::Constrained(c) => Err(ProblemError::ConstrainedOnly(c.name().to_string())),
        }
    }
}
