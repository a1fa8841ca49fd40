//! Piecewise-linear extraction of the singular set, the Pareto critical set and
//! its stable part, and gluing into a labeled simplicial complex.

mod cell;
mod clip;
mod complex;
mod hessian;
mod lambda;
mod minors;
mod pipeline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cell::{
    analyze_cell, analyze_cell_first_order, analyze_cell_second_order, singular_vertices_of_cell, CellAnalysis,
    CellInput, HessianSource, Piece, PolyVertex, SingularVertex, VertexFlags,
};
pub use clip::{clip_polytope, Clip};
pub use complex::{dist_points, glue, ComplexSimplex, ComplexVertex, Diagnostics, Marker, ParetoComplex, Polyline};
pub use hessian::{finite_difference_hessians, generalized_hessian, interpolate_hessians, kernel_basis};
pub use lambda::{solve_lambda, LambdaSolution, EPS_RANK};
pub use minors::MinorSelection;
pub(crate) use pipeline::with_threads;
pub use pipeline::{analyze, analyze_cells, analyze_with_cache, minor_values, AnalysisOptions, HessianMode, NodalCache};

use crate::tessellation::TessellationError;

/// Barycentric weights above `-EPS_ACCEPT` are accepted.
pub const EPS_ACCEPT: f64 = 1e-10;
/// Weights above this value count towards a vertex's support.
pub const EPS_SUPPORT: f64 = 1e-12;
/// Relative residual above which a vertex with a valid `lambda` is non-critical.
pub const EPS_RES: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("gradient matrix has rank {rank}, expected at least {expected}")]
    RankCollapse { rank: usize, expected: usize },
    #[error("kernel of the gradient matrix is not {expected}-dimensional (rank {rank})")]
    KernelDimensionMismatch { expected: usize, rank: usize },
    #[error("singular linear system on face {0:?}")]
    SingularLinearSystem(Vec<usize>),
    #[error("degenerate cell")]
    DegenerateCell,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("non-finite derivative at node {0}")]
    NonFinite(usize),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
}

/// Identity of a vertex of the piecewise-linear sets, independent of coordinates.
///
/// Singular vertices are identified by the nodes carrying positive weight;
/// vertices created by a clip by the two parent vertices and the clip stage
/// (`0..m` for the multipliers, `m` for stability).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexKey {
    Support(Vec<usize>),
    Split { lo: Box<VertexKey>, hi: Box<VertexKey>, stage: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    SingularOnly,
    CriticalUnstable,
    CriticalStable,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::SingularOnly, Stratum::CriticalUnstable, Stratum::CriticalStable];

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::SingularOnly => "singular_only",
            Stratum::CriticalUnstable => "critical_unstable",
            Stratum::CriticalStable => "critical_stable",
        }
    }

    pub fn is_critical(self) -> bool {
        self != Stratum::SingularOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerKind {
    CriticalityBoundary,
    Cusp,
}

/// How far the analysis goes: multipliers only, or also stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Order {
    First,
    #[default]
    Second,
}
