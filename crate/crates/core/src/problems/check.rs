//! Central-difference verification of hand-written derivatives.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EqualityConstraint, VectorProblem};

/// Relative error below which analytic and finite-difference derivatives agree.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeReport {
    pub samples: usize,
    pub step: f64,
    pub max_jacobian_error: f64,
    pub max_hessian_error: f64,
    pub max_symmetry_error: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Uniform points in `domain` shrunk by `margin` on every side.
pub fn sample_points(domain: &[(f64, f64)], count: usize, margin: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            domain
                .iter()
                .map(|&(a, b)| {
                    let (lo, hi) = (a + margin, b - margin);
                    lo + (hi - lo) * rng.gen::<f64>()
                })
                .collect()
        })
        .collect()
}

fn rel_error(analytic: &DMatrix<f64>, fd: &DMatrix<f64>) -> f64 {
    let scale = analytic.amax().max(1.0);
    (analytic - fd).amax() / scale
}

fn shifted(x: &[f64], k: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += h;
    y
}

/// Compares the analytic Jacobian and Hessians of `p` against central differences.
pub fn check_derivatives(p: &dyn VectorProblem, samples: &[Vec<f64>], h: f64) -> DerivativeReport {
    let (n, m) = (p.n(), p.m());
    let mut report = DerivativeReport {
        samples: samples.len(),
        step: h,
        max_jacobian_error: 0.0,
        max_hessian_error: 0.0,
        max_symmetry_error: 0.0,
        passed: true,
        failures: Vec::new(),
    };
    for x in samples {
        let jac = p.jacobian(x);
        let mut fd = DMatrix::zeros(m, n);
        for k in 0..n {
            let up = p.eval(&shifted(x, k, h));
            let dn = p.eval(&shifted(x, k, -h));
            for j in 0..m {
                fd[(j, k)] = (up[j] - dn[j]) / (2.0 * h);
            }
        }
        let e = rel_error(&jac, &fd);
        report.max_jacobian_error = report.max_jacobian_error.max(e);
        if e >= DERIVATIVE_TOLERANCE {
            report.failures.push(format!("jacobian at {x:?}: relative error {e:.3e}"));
        }

        let Some(hess) = p.hessians(x) else { continue };
        let jac_up: Vec<DMatrix<f64>> = (0..n).map(|k| p.jacobian(&shifted(x, k, h))).collect();
        let jac_dn: Vec<DMatrix<f64>> = (0..n).map(|k| p.jacobian(&shifted(x, k, -h))).collect();
        for (j, hj) in hess.iter().enumerate() {
            let sym = (hj - hj.transpose()).amax();
            report.max_symmetry_error = report.max_symmetry_error.max(sym);
            if sym > 1e-10 {
                report.failures.push(format!("hessian {j} at {x:?} is not symmetric ({sym:.3e})"));
            }
            let fdh = DMatrix::from_fn(n, n, |a, b| (jac_up[b][(j, a)] - jac_dn[b][(j, a)]) / (2.0 * h));
            let e = rel_error(hj, &fdh);
            report.max_hessian_error = report.max_hessian_error.max(e);
            if e >= DERIVATIVE_TOLERANCE {
                report.failures.push(format!("hessian {j} at {x:?}: relative error {e:.3e}"));
            }
        }
    }
    report.passed = report.failures.is_empty();
    report
}

/// Compares the constraint Jacobian against central differences of `g`.
pub fn check_constraint_derivatives(g: &dyn EqualityConstraint, samples: &[Vec<f64>], h: f64) -> DerivativeReport {
    let mut report = DerivativeReport {
        samples: samples.len(),
        step: h,
        max_jacobian_error: 0.0,
        max_hessian_error: 0.0,
        max_symmetry_error: 0.0,
        passed: true,
        failures: Vec::new(),
    };
    for x in samples {
        let n = x.len();
        let dg = g.jacobian(x);
        let mut fd = DMatrix::zeros(g.count(), n);
        for k in 0..n {
            let up = g.value(&shifted(x, k, h));
            let dn = g.value(&shifted(x, k, -h));
            for j in 0..g.count() {
                fd[(j, k)] = (up[j] - dn[j]) / (2.0 * h);
            }
        }
        let e = rel_error(&dg, &fd);
        report.max_jacobian_error = report.max_jacobian_error.max(e);
        if e >= DERIVATIVE_TOLERANCE {
            report.failures.push(format!("constraint jacobian at {x:?}: relative error {e:.3e}"));
        }
    }
    report.passed = report.failures.is_empty();
    report
}
