//! Name-based lookup of the built-in problems.

use std::sync::Arc;

use super::examples::{self, TriQuadratic};
use super::{ConstrainedProblem, Problem, ProblemError};

/// Static description of a registered problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub n: usize,
    pub m: usize,
    pub constrained: bool,
    /// Grid used by the command line when none is given.
    pub default_grid: &'static str,
    pub summary: &'static str,
}

const ENTRIES: &[RegistryEntry] = &[
    RegistryEntry { name: "triv", n: 2, m: 2, constrained: false, default_grid: "40x40", summary: "two negative definite quadratics" },
    RegistryEntry { name: "smale", n: 2, m: 2, constrained: false, default_grid: "60x60", summary: "-y and (y - x^3)/(x + 1): one critical curve with a cusp" },
    RegistryEntry { name: "sms", n: 2, m: 2, constrained: false, default_grid: "60x60", summary: "definite and indefinite quadratic: global front and a local front ending in a cusp" },
    RegistryEntry { name: "noncv", n: 2, m: 2, constrained: false, default_grid: "80x80", summary: "quadratic with two Gaussian wells: unbounded branch and two loops" },
    RegistryEntry { name: "locglob", n: 3, m: 2, constrained: false, default_grid: "10x20x10", summary: "broad and sharp Gaussian ridges in R^3" },
    RegistryEntry { name: "zdt3reg", n: 6, m: 2, constrained: false, default_grid: "random:300:seed=0", summary: "regularized ZDT3 in R^6" },
    RegistryEntry { name: "tri_quadratic", n: 3, m: 3, constrained: false, default_grid: "12x12x12", summary: "three perturbed negative definite quadratics" },
    RegistryEntry { name: "tri_quadratic_ncv", n: 3, m: 3, constrained: false, default_grid: "12x12x12", summary: "tri_quadratic with a secondary maximum in the first objective" },
    RegistryEntry { name: "sphere_proj", n: 3, m: 2, constrained: true, default_grid: "subdiv:2", summary: "first two coordinates on the unit sphere" },
];

pub fn registry_entries() -> &'static [RegistryEntry] {
    ENTRIES
}

/// Returns the problem registered under `name`.
pub fn registry_get(name: &str) -> Result<Problem, ProblemError> {
    let p = match name {
        "triv" => Problem::Unconstrained(Arc::new(examples::triv())),
        "smale" => Problem::Unconstrained(Arc::new(examples::smale())),
        "sms" => Problem::Unconstrained(Arc::new(examples::sms())),
        "noncv" => Problem::Unconstrained(Arc::new(examples::noncv())),
        "locglob" => Problem::Unconstrained(Arc::new(examples::locglob())),
        "zdt3reg" => Problem::Unconstrained(Arc::new(examples::zdt3reg())),
        "tri_quadratic" => {
            Problem::Unconstrained(Arc::new(examples::tri_quadratic("tri_quadratic", TriQuadratic::convex())))
        }
        "tri_quadratic_ncv" => Problem::Unconstrained(Arc::new(examples::tri_quadratic(
            "tri_quadratic_ncv",
            TriQuadratic::nonconvex(),
        ))),
        "sphere_proj" => Problem::Constrained(ConstrainedProblem {
            base: Arc::new(examples::coordinate_projection()),
            constraint: Arc::new(examples::sphere_constraint()),
        }),
        other => return Err(ProblemError::UnknownProblem(other.to_string())),
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{check_constraint_derivatives, check_derivatives, sample_points};

    #[test]
    fn every_entry_resolves() {
        for e in registry_entries() {
            let p = registry_get(e.name).unwrap();
            assert_eq!(p.name(), e.name);
            assert_eq!(p.base().n(), e.n);
            assert_eq!(p.base().m(), e.m);
            assert_eq!(matches!(p, Problem::Constrained(_)), e.constrained);
            assert!(p.base().minor_selection().covers(e.n.min(p.base().n())));
        }
        assert_eq!(registry_get("nope").err(), Some(ProblemError::UnknownProblem("nope".into())));
    }

    #[test]
    fn triv_values() {
        let p = registry_get("triv").unwrap();
        assert_eq!(p.base().eval(&[0.0, 0.0])[0], 0.0);
        assert_eq!(p.base().eval(&[3.0, 2.5])[1], 0.0);
    }

    #[test]
    fn smale_first_gradient_is_constant() {
        let p = registry_get("smale").unwrap();
        for x in [[0.0, 0.0], [0.5, -3.0], [-0.5, 0.2]] {
            let j = p.base().jacobian(&x);
            assert_eq!((j[(0, 0)], j[(0, 1)]), (0.0, -1.0));
        }
    }

    #[test]
    fn sphere_constraint_gradient() {
        let Problem::Constrained(c) = registry_get("sphere_proj").unwrap() else { panic!() };
        let dg = c.constraint.jacobian(&[1.0, 0.0, 0.0]);
        assert_eq!(dg.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(c.constraint.value(&[1.0, 0.0, 0.0]), vec![0.0]);
    }

    #[test]
    fn zdt3reg_domain_is_verbatim() {
        let p = registry_get("zdt3reg").unwrap();
        let d = p.base().domain();
        assert_eq!(d[0], (0.1, 0.425));
        assert!(d[1..].iter().all(|&b| b == (-0.16, 0.16)));
    }

    #[test]
    fn all_problems_pass_derivative_check() {
        for e in registry_entries() {
            let p = registry_get(e.name).unwrap();
            let base = p.base();
            let h = 1e-4 * base.diagonal();
            let pts = sample_points(base.domain(), 20, h, 42);
            let report = check_derivatives(base, &pts, h);
            assert!(report.passed, "{}: {:?}", e.name, report);
        }
    }

    #[test]
    fn sphere_constraint_derivatives_on_sphere() {
        let Problem::Constrained(c) = registry_get("sphere_proj").unwrap() else { panic!() };
        let pts: Vec<Vec<f64>> = sample_points(&[(-1.0, 1.0); 3], 20, 0.0, 3)
            .into_iter()
            .map(|p| {
                let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                p.iter().map(|v| v / r).collect()
            })
            .collect();
        let report = check_constraint_derivatives(c.constraint.as_ref(), &pts, 1e-4 * 12f64.sqrt());
        assert!(report.passed, "{report:?}");
    }
}
