//! Second-order data: kernel bases, the reduced Hessian and finite-difference Hessians.

use nalgebra::{DMatrix, SymmetricEigen};

use super::lambda::EPS_RANK;
use super::ContinuationError;

/// Orthonormal basis (`n x (n - m + 1)`) of the numerical kernel of the `m x n` matrix `g`.
///
/// Uses the right singular vectors belonging to the `n - m + 1` smallest
/// singular values of `g` padded with zero rows to a square matrix.
pub fn kernel_basis(g: &DMatrix<f64>) -> Result<DMatrix<f64>, ContinuationError> {
    let (m, n) = g.shape();
    if m > n {
        return Err(ContinuationError::KernelDimensionMismatch { expected: 0, rank: m });
    }
    let mut sq = DMatrix::zeros(n, n);
    sq.view_mut((0, 0), (m, n)).copy_from(g);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let top = svd.singular_values[order[0]];
    let rank = order.iter().filter(|&&i| svd.singular_values[i] > EPS_RANK * top).count();
    let dim = n - m + 1;
    if top == 0.0 || rank + 1 < m {
        return Err(ContinuationError::KernelDimensionMismatch { expected: dim, rank });
    }
    Ok(DMatrix::from_fn(n, dim, |i, k| v_t[(order[m - 1 + k], i)]))
}

/// Eigenvalues (ascending) of `w' (sum_j lambda_j H_j) w`.
pub fn generalized_hessian(lambda: &[f64], hessians: &[DMatrix<f64>], w: &DMatrix<f64>) -> Vec<f64> {
    let n = w.nrows();
    let mut combo = DMatrix::zeros(n, n);
    for (l, h) in lambda.iter().zip(hessians) {
        combo += h * *l;
    }
    let reduced = w.transpose() * combo * w;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(reduced).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `sum_k mu_k H(P_k)` for each objective.
pub fn interpolate_hessians(mu: &[f64], nodal: &[&[DMatrix<f64>]]) -> Vec<DMatrix<f64>> {
    let m = nodal[0].len();
    (0..m)
        .map(|j| {
            let mut acc = nodal[0][j].clone() * mu[0];
            for (w, h) in mu.iter().zip(nodal).skip(1) {
                acc += &h[j] * *w;
            }
            acc
        })
        .collect()
}

/// Per-objective Hessian estimates on one simplex from nodal gradients.
///
/// `points` are the `n + 1` vertices and `grads[k]` the `m x n` Jacobian at
/// `points[k]`. Solves `V H = G` with `V` the edge vectors from the first
/// vertex and `G` the gradient differences, then symmetrizes. Exact for
/// quadratics.
pub fn finite_difference_hessians(
    points: &[&[f64]],
    grads: &[&DMatrix<f64>],
) -> Result<Vec<DMatrix<f64>>, ContinuationError> {
    let n = points[0].len();
    let m = grads[0].nrows();
    let v = DMatrix::from_fn(n, n, |k, i| points[k + 1][i] - points[0][i]);
    let scale = v.amax();
    let lu = v.lu();
    let det = lu.determinant();
    if scale == 0.0 || det.abs() <= 1e-14 * scale.powi(n as i32) {
        return Err(ContinuationError::DegenerateCell);
    }
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let g = DMatrix::from_fn(n, n, |k, i| grads[k + 1][(j, i)] - grads[0][(j, i)]);
        let h = lu.solve(&g).ok_or(ContinuationError::DegenerateCell)?;
        out.push((&h + h.transpose()) * 0.5);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_of_single_row() {
        let g = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, -2.0, 0.0, 0.0]);
        let w = kernel_basis(&g).unwrap();
        assert_eq!(w.shape(), (3, 2));
        assert_abs_diff_eq!((&g * &w).amax(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((w.transpose() * &w - DMatrix::identity(2, 2)).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn square_case_is_scalar() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, -1.0]);
        let w = kernel_basis(&g).unwrap();
        assert_eq!(w.shape(), (2, 1));
        assert_abs_diff_eq!(w[(0, 0)].abs(), 0.5f64.sqrt(), epsilon = 1e-12);
        let h = vec![DMatrix::from_diagonal_element(2, 2, -2.0), DMatrix::from_diagonal_element(2, 2, -4.0)];
        let eig = generalized_hessian(&[0.5, 0.5], &h, &w);
        assert_eq!(eig.len(), 1);
        assert_abs_diff_eq!(eig[0], -3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_matrix_has_no_kernel_of_expected_size() {
        let g = DMatrix::zeros(2, 2);
        assert!(matches!(kernel_basis(&g), Err(ContinuationError::KernelDimensionMismatch { .. })));
    }

    #[test]
    fn fd_hessian_exact_on_quadratic_and_zero_on_linear() {
        // u1 = x^2 + 3xy - y^2, u2 = 2x - y
        let grad = |p: &[f64]| DMatrix::from_row_slice(2, 2, &[2.0 * p[0] + 3.0 * p[1], 3.0 * p[0] - 2.0 * p[1], 2.0, -1.0]);
        let pts: [&[f64]; 3] = [&[0.3, -0.2], &[1.1, 0.4], &[-0.5, 0.9]];
        let gs: Vec<DMatrix<f64>> = pts.iter().map(|p| grad(p)).collect();
        let refs: Vec<&DMatrix<f64>> = gs.iter().collect();
        let h = finite_difference_hessians(&pts, &refs).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 3.0, 3.0, -2.0]);
        assert_abs_diff_eq!((&h[0] - expect).amax(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h[1].amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fd_hessian_rejects_flat_cell() {
        let pts: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        let g = DMatrix::zeros(1, 2);
        assert!(matches!(finite_difference_hessians(&pts, &[&g, &g, &g]), Err(ContinuationError::DegenerateCell)));
    }
}
