//! Closed-form objectives of the built-in examples and their derivatives.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{AnalyticProblem, Derivatives, EqualityConstraint};
use crate::continuation::MinorSelection;

fn two_by_two(values: [f64; 2], grads: [[f64; 2]; 2], hess: [[f64; 3]; 2]) -> Derivatives {
    Derivatives {
        values: values.to_vec(),
        jacobian: DMatrix::from_row_slice(2, 2, &[grads[0][0], grads[0][1], grads[1][0], grads[1][1]]),
        hessians: hess
            .iter()
            .map(|h| DMatrix::from_row_slice(2, 2, &[h[0], h[1], h[1], h[2]]))
            .collect(),
    }
}

/// Two negative definite quadratics with maxima at the origin and at (3, 2.5).
pub(crate) fn triv() -> AnalyticProblem {
    AnalyticProblem::new("triv", vec![(-2.0, 5.0), (-2.0, 4.5)], 2, |x| {
        let (a, b) = (x[0], x[1]);
        two_by_two(
            [
                -1.05 * a * a - 0.98 * b * b,
                -0.99 * (a - 3.0).powi(2) - 1.03 * (b - 2.5).powi(2),
            ],
            [[-2.1 * a, -1.96 * b], [-1.98 * (a - 3.0), -2.06 * (b - 2.5)]],
            [[-2.1, 0.0, -1.96], [-1.98, 0.0, -2.06]],
        )
    })
}

/// `u1 = -y`, `u2 = (y - x^3) / (x + 1)`; the box stays clear of the pole at `x = -1`.
pub(crate) fn smale() -> AnalyticProblem {
    AnalyticProblem::new("smale", vec![(-0.75, 1.0), (-5.5, 0.5)], 2, |x| {
        let (a, b) = (x[0], x[1]);
        let d = a + 1.0;
        let num = -2.0 * a.powi(3) - 3.0 * a * a - b;
        let num_x = -6.0 * a * a - 6.0 * a;
        two_by_two(
            [-b, (b - a.powi(3)) / d],
            [[0.0, -1.0], [num / (d * d), 1.0 / d]],
            [[0.0, 0.0, 0.0], [(num_x * d - 2.0 * num) / d.powi(3), -1.0 / (d * d), 0.0]],
        )
    })
}

/// A negative definite and an indefinite quadratic.
pub(crate) fn sms() -> AnalyticProblem {
    AnalyticProblem::new("sms", vec![(-2.0, 10.0), (-3.0, 3.0)], 2, |x| {
        let (a, b) = (x[0], x[1]);
        two_by_two(
            [-a * a - b * b, -(a - 6.0).powi(2) + (b + 0.3).powi(2)],
            [[-2.0 * a, -2.0 * b], [-2.0 * (a - 6.0), 2.0 * (b + 0.3)]],
            [[-2.0, 0.0, -2.0], [-2.0, 0.0, 2.0]],
        )
    })
}

/// A quadratic with two Gaussian wells against a quadratic.
pub(crate) fn noncv() -> AnalyticProblem {
    AnalyticProblem::new("noncv", vec![(-4.0, 7.0), (-2.5, 2.5)], 2, |x| {
        let (a, b) = (x[0], x[1]);
        let e1 = (-(a + 2.0).powi(2) - b * b).exp();
        let e2 = (-(a - 2.0).powi(2) - b * b).exp();
        let u1 = -a * a - b * b - 4.0 * (e1 + e2);
        let u1x = -2.0 * a + 8.0 * ((a + 2.0) * e1 + (a - 2.0) * e2);
        let u1y = -2.0 * b + 8.0 * b * (e1 + e2);
        let u1xx = -2.0 + 8.0 * (e1 * (1.0 - 2.0 * (a + 2.0).powi(2)) + e2 * (1.0 - 2.0 * (a - 2.0).powi(2)));
        let u1xy = -16.0 * b * ((a + 2.0) * e1 + (a - 2.0) * e2);
        let u1yy = -2.0 + 8.0 * (e1 + e2) * (1.0 - 2.0 * b * b);
        two_by_two(
            [u1, -(a - 6.0).powi(2) - (b + 0.5).powi(2)],
            [[u1x, u1y], [-2.0 * (a - 6.0), -2.0 * (b + 0.5)]],
            [[u1xx, u1xy, u1yy], [-2.0, 0.0, -2.0]],
        )
    })
}

/// `sqrt(2 pi / s) * exp(q / s^2)` with `q = (Sx - p)' M (Sx - p)`, `S = diag(1, 1, sz)`.
fn gaussian_quadratic(
    x: &Vector3<f64>,
    m: &Matrix3<f64>,
    p: &Vector3<f64>,
    s: f64,
    sz: f64,
) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let scale = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sz));
    let d = scale * x - p;
    let q = d.dot(&(m * d));
    let c = (2.0 * PI / s).sqrt();
    let e = c * (q / (s * s)).exp();
    let gq = 2.0 * (m * d) / (s * s);
    let grad = scale * (e * gq);
    let hess = scale * (e * (gq * gq.transpose() + 2.0 * m / (s * s))) * scale;
    (e, grad, hess)
}

/// A broad Gaussian ridge superposed with a sharp local one.
pub(crate) fn locglob() -> AnalyticProblem {
    let m = Matrix3::new(-1.0, -0.03, 0.011, -0.03, -1.0, 0.07, 0.011, 0.07, -1.01);
    let p0 = Vector3::new(0.0, 0.15, 0.0);
    let p1 = Vector3::new(0.0, -1.1, 0.0);
    AnalyticProblem::new("locglob", vec![(-1.0, 1.0), (-1.6, 0.6), (-0.5, 0.5)], 2, move |x| {
        let v = Vector3::new(x[0], x[1], x[2]);
        let (f0, g0, h0) = gaussian_quadratic(&v, &m, &p0, 0.35, 1.0);
        let (f1, g1, h1) = gaussian_quadratic(&v, &m, &p1, 3.0, 0.5);
        let f = f0 + f1;
        let g = g0 + g1;
        let h = (h0 + h1) * FRAC_1_SQRT_2;
        let a = FRAC_1_SQRT_2;
        let jac = DMatrix::from_row_slice(
            2,
            3,
            &[a * (1.0 + g[0]), a * g[1], a * g[2], a * (-1.0 + g[0]), a * g[1], a * g[2]],
        );
        let hd = DMatrix::from_iterator(3, 3, h.iter().copied());
        Derivatives { values: vec![a * (x[0] + f), a * (-x[0] + f)], jacobian: jac, hessians: vec![hd.clone(), hd] }
    })
    .with_selection(MinorSelection::pivoted(3, &[0]))
}

/// Regularized ZDT3 in six variables.
pub(crate) fn zdt3reg() -> AnalyticProblem {
    let mut domain = vec![(0.1, 0.425)];
    domain.extend(std::iter::repeat((-0.16, 0.16)).take(5));
    AnalyticProblem::new("zdt3reg", domain, 2, |x| {
        let x1 = x[0];
        let w = 10.0 * PI;
        let (sn, cs) = (w * x1).sin_cos();
        let tail: f64 = x[1..].iter().map(|v| v * v).sum();
        let mut jac = DMatrix::zeros(2, 6);
        jac[(0, 0)] = 1.0;
        jac[(1, 0)] = -0.5 / x1.sqrt() - sn - w * x1 * cs;
        for k in 1..6 {
            jac[(1, k)] = 2.0 * x[k];
        }
        let mut h2 = DMatrix::zeros(6, 6);
        h2[(0, 0)] = 0.25 * x1.powf(-1.5) - 2.0 * w * cs + w * w * x1 * sn;
        for k in 1..6 {
            h2[(k, k)] = 2.0;
        }
        Derivatives {
            values: vec![x1, 1.0 - x1.sqrt() - x1 * sn + tail],
            jacobian: jac,
            hessians: vec![DMatrix::zeros(6, 6), h2],
        }
    })
    .with_selection(MinorSelection::pivoted(6, &[0]))
}

/// Coefficients of the three-objective quadratic family.
#[derive(Debug, Clone)]
pub(crate) struct TriQuadratic {
    pub alpha: [[f64; 3]; 3],
    pub centers: [[f64; 3]; 3],
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    /// Secondary maximum added to the first objective: `(alpha4, C4)`.
    pub bump: Option<([f64; 3], [f64; 3])>,
}

impl TriQuadratic {
    pub(crate) fn convex() -> Self {
        TriQuadratic {
            alpha: [[1.0, 1.2, 0.9], [0.8, 1.0, 1.1], [1.1, 0.9, 1.0]],
            centers: [[0.0, 0.0, 0.0], [3.0, 0.0, 0.5], [1.0, 2.5, -0.5]],
            beta: [0.0, 0.2, 0.2],
            gamma: [1.0, 2.0, 2.0],
            bump: None,
        }
    }

    pub(crate) fn nonconvex() -> Self {
        let mut t = Self::convex();
        t.beta[0] = 3.0;
        t.gamma[0] = 1.0;
        t.bump = Some(([2.0, 2.0, 2.0], [2.5, 2.5, 1.0]));
        t
    }

    fn quadratic(alpha: &[f64; 3], c: &[f64; 3], x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let mut v = 0.0;
        let mut g = DVector::zeros(3);
        let mut h = DMatrix::zeros(3, 3);
        for i in 0..3 {
            let d = x[i] - c[i];
            v -= alpha[i] * d * d;
            g[i] = -2.0 * alpha[i] * d;
            h[(i, i)] = -2.0 * alpha[i];
        }
        (v, g, h)
    }

    pub(crate) fn derivatives(&self, x: &[f64]) -> Derivatives {
        let mut values = Vec::with_capacity(3);
        let mut jac = DMatrix::zeros(3, 3);
        let mut hessians = Vec::with_capacity(3);
        for j in 0..3 {
            let (mut v, mut g, mut h) = Self::quadratic(&self.alpha[j], &self.centers[j], x);
            match j {
                0 => {
                    if let Some((a4, c4)) = &self.bump {
                        let (f4, g4, h4) = Self::quadratic(a4, c4, x);
                        let (b, gm) = (self.beta[0], self.gamma[0]);
                        let e = b * (f4 / gm).exp();
                        v += e;
                        g += &g4 * (e / gm);
                        h += (&g4 * g4.transpose()) * (e / (gm * gm)) + h4 * (e / gm);
                    }
                }
                1 => {
                    let k = PI / self.gamma[1];
                    let s = k * (x[0] + x[1]);
                    let b = self.beta[1];
                    v += b * s.sin();
                    let dg = b * k * s.cos();
                    g[0] += dg;
                    g[1] += dg;
                    let dh = -b * k * k * s.sin();
                    for (i, l) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        h[(i, l)] += dh;
                    }
                }
                _ => {
                    let k = PI / self.gamma[2];
                    let s = k * (x[0] - x[1]);
                    let b = self.beta[2];
                    v += b * s.cos();
                    let dg = -b * k * s.sin();
                    g[0] += dg;
                    g[1] -= dg;
                    let dh = -b * k * k * s.cos();
                    h[(0, 0)] += dh;
                    h[(1, 1)] += dh;
                    h[(0, 1)] -= dh;
                    h[(1, 0)] -= dh;
                }
            }
            values.push(v);
            jac.set_row(j, &g.transpose());
            hessians.push(h);
        }
        Derivatives { values, jacobian: jac, hessians }
    }
}

pub(crate) fn tri_quadratic(name: &str, params: TriQuadratic) -> AnalyticProblem {
    AnalyticProblem::new(name, vec![(-1.0, 4.0), (-1.0, 3.5), (-1.5, 1.5)], 3, move |x| params.derivatives(x))
}

/// The first two coordinates of `R^3`, to be restricted to the unit sphere.
pub(crate) fn coordinate_projection() -> AnalyticProblem {
    AnalyticProblem::new("sphere_proj", vec![(-1.0, 1.0); 3], 2, |x| Derivatives {
        values: vec![x[0], x[1]],
        jacobian: DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        hessians: vec![DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)],
    })
}

/// `g(x) = (|x|^2 - 1) / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SphereConstraint;

pub fn sphere_constraint() -> SphereConstraint {
    SphereConstraint
}

impl EqualityConstraint for SphereConstraint {
    fn count(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        vec![0.5 * (x.iter().map(|v| v * v).sum::<f64>() - 1.0)]
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, x.len(), x)
    }
}
