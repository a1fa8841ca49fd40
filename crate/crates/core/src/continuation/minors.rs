//! Minor selections of the Jacobian and their values.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which `m x m` column subsets of `Du` are used as the minors `omega_j`.
///
/// The default is the sliding family of contiguous windows `[j, j + m)`. The
/// pivoted family keeps `m - 1` fixed pivot columns and adds one of the
/// remaining columns per minor; it is needed when two objectives share a
/// gradient block, which makes some sliding windows vanish identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorSelection {
    columns: Vec<Vec<usize>>,
}

impl MinorSelection {
    /// Contiguous windows `{j, ..., j + m - 1}` for `j = 0..n - m`.
    pub fn sliding(n: usize, m: usize) -> Self {
        assert!(m >= 1 && m <= n, "sliding minors need 1 <= m <= n");
        MinorSelection { columns: (0..=n - m).map(|j| (j..j + m).collect()).collect() }
    }

    /// Pivot columns plus each remaining column in increasing order.
    pub fn pivoted(n: usize, pivots: &[usize]) -> Self {
        let mut sorted = pivots.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert!(sorted.iter().all(|&c| c < n), "pivot column out of range");
        let columns = (0..n)
            .filter(|c| !sorted.contains(c))
            .map(|c| {
                let mut cols = sorted.clone();
                cols.push(c);
                cols.sort_unstable();
                cols
            })
            .collect();
        MinorSelection { columns }
    }

    /// Number of minors, `r = n - m + 1`.
    pub fn r(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    /// True when every Jacobian column is used by at least one minor.
    pub fn covers(&self, n: usize) -> bool {
        (0..n).all(|c| self.columns.iter().any(|w| w.contains(&c)))
    }

    /// `omega_j = det` of the selected column blocks of `jac`.
    pub fn values(&self, jac: &DMatrix<f64>) -> Vec<f64> {
        self.columns
            .iter()
            .map(|cols| {
                let m = jac.nrows();
                DMatrix::from_fn(m, m, |i, k| jac[(i, cols[k])]).determinant()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_rows_vanish() {
        let sel = MinorSelection::sliding(2, 2);
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -2.0, 0.0]);
        assert_eq!(sel.values(&j), vec![0.0]);
    }

    #[test]
    fn identity_is_one() {
        let sel = MinorSelection::sliding(2, 2);
        assert_eq!(sel.values(&DMatrix::identity(2, 2)), vec![1.0]);
    }

    #[test]
    fn windows_in_three_dimensions() {
        let sel = MinorSelection::sliding(3, 2);
        assert_eq!(sel.r(), 2);
        let j = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(sel.values(&j), vec![1.0, 0.0]);
        assert!(sel.covers(3));
    }

    #[test]
    fn pivoted_family() {
        let sel = MinorSelection::pivoted(3, &[0]);
        assert_eq!(sel.columns(), &[vec![0, 1], vec![0, 2]]);
        assert_eq!(sel.r(), 2);
        assert!(sel.covers(3));
    }
}
