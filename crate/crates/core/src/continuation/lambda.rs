//! Weights of the vanishing combination `sum_j lambda_j Du_j = 0`, `sum_j lambda_j = 1`.

use nalgebra::{DMatrix, DVector};

use super::ContinuationError;

/// Singular values below this fraction of the largest count as zero.
pub const EPS_RANK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda: Vec<f64>,
    /// `|lambda' G|` for the matrix as given.
    pub residual: f64,
    /// Residual divided by the largest row norm of `G`.
    pub relative_residual: f64,
}

/// Solves for `lambda` in least squares subject to the normalization.
///
/// The rows of `g` are the (interpolated) gradients. The minimizer of
/// `|lambda' G|^2` on `sum lambda = 1` is taken from the KKT system via a
/// pseudo-inverse, so rank-one families (identical gradients) resolve to the
/// minimum-norm weights. Signs are not constrained.
pub fn solve_lambda(g: &DMatrix<f64>) -> Result<LambdaSolution, ContinuationError> {
    let m = g.nrows();
    let scale = (0..m).map(|i| g.row(i).norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(ContinuationError::RankCollapse { rank: 0, expected: m.saturating_sub(1) });
    }
    let gn = g / scale;
    let sv = gn.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > EPS_RANK * top).count();
    if rank + 1 < m {
        return Err(ContinuationError::RankCollapse { rank, expected: m - 1 });
    }
    let mut k = DMatrix::zeros(m + 1, m + 1);
    let gram = &gn * gn.transpose() * 2.0;
    k.view_mut((0, 0), (m, m)).copy_from(&gram);
    for i in 0..m {
        k[(i, m)] = 1.0;
        k[(m, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let svd = k.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let sol = svd
        .solve(&rhs, tol)
        .map_err(|_| ContinuationError::RankCollapse { rank, expected: m - 1 })?;
    let lambda: Vec<f64> = sol.iter().take(m).copied().collect();
    let combo = DVector::from_column_slice(&lambda).transpose() * g;
    let residual = combo.norm();
    Ok(LambdaSolution { lambda, residual, relative_residual: residual / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn opposed_rows() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -2.0, 0.0]);
        let s = solve_lambda(&g).unwrap();
        assert_abs_diff_eq!(s.lambda[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda[1], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.residual, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_rows_take_minimum_norm() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let s = solve_lambda(&g).unwrap();
        assert_abs_diff_eq!(s.lambda[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.residual, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_gradients_collapse() {
        let g = DMatrix::zeros(2, 3);
        assert!(matches!(solve_lambda(&g), Err(ContinuationError::RankCollapse { .. })));
    }

    #[test]
    fn three_objectives_rank_two() {
        // g3 = -(g1 + g2) so lambda = (1, 1, 1) / 3
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.2, -1.0, -1.0, -0.7]);
        let s = solve_lambda(&g).unwrap();
        for l in &s.lambda {
            assert_abs_diff_eq!(*l, 1.0 / 3.0, epsilon = 1e-10);
        }
    }
}
