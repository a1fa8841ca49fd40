//! Exact Euclidean distance from a point to a simplex of any dimension.

use nalgebra::{DMatrix, DVector};

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared distance from `p` to the closed simplex spanned by `verts`.
///
/// Projects onto the affine hull; when some barycentric coordinate of the
/// projection is negative, the nearest point lies on a facet opposite one of
/// those vertices, and the facets are searched recursively.
pub fn point_simplex_sq(p: &[f64], verts: &[&[f64]]) -> f64 {
    match verts.len() {
        0 => f64::INFINITY,
        1 => sq(p, verts[0]),
        2 => {
            let (a, b) = (verts[0], verts[1]);
            let ab: f64 = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum();
            if ab == 0.0 {
                return sq(p, a);
            }
            let t: f64 = a.iter().zip(b).zip(p).map(|((x, y), q)| (y - x) * (q - x)).sum::<f64>() / ab;
            let t = t.clamp(0.0, 1.0);
            a.iter().zip(b).zip(p).map(|((x, y), q)| (x + t * (y - x) - q).powi(2)).sum()
        }
        k => {
            let d = p.len();
            let e = DMatrix::from_fn(d, k - 1, |i, j| verts[j + 1][i] - verts[0][i]);
            let rhs = DVector::from_fn(d, |i, _| p[i] - verts[0][i]);
            let gram = e.transpose() * &e;
            if let Some(c) = gram.cholesky() {
                let w = c.solve(&(e.transpose() * &rhs));
                let w0 = 1.0 - w.sum();
                if w0 >= 0.0 && w.iter().all(|&v| v >= 0.0) {
                    return (&e * &w - rhs).norm_squared();
                }
                let bary: Vec<f64> = std::iter::once(w0).chain(w.iter().copied()).collect();
                return (0..k)
                    .filter(|&i| bary[i] < 0.0)
                    .map(|i| {
                        let facet: Vec<&[f64]> = (0..k).filter(|&j| j != i).map(|j| verts[j]).collect();
                        point_simplex_sq(p, &facet)
                    })
                    .fold(f64::INFINITY, f64::min);
            }
            // Flat simplex: its facets cover it.
            (0..k)
                .map(|i| {
                    let facet: Vec<&[f64]> = (0..k).filter(|&j| j != i).map(|j| verts[j]).collect();
                    point_simplex_sq(p, &facet)
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn segment_and_triangle_cases() {
        let (a, b): (&[f64], &[f64]) = (&[0.0, 0.0], &[1.0, 0.0]);
        assert_abs_diff_eq!(point_simplex_sq(&[0.5, 2.0], &[a, b]), 4.0);
        assert_abs_diff_eq!(point_simplex_sq(&[-3.0, 4.0], &[a, b]), 25.0);
        let c: &[f64] = &[0.0, 1.0];
        assert_abs_diff_eq!(point_simplex_sq(&[0.2, 0.2], &[a, b, c]), 0.0);
        assert_abs_diff_eq!(point_simplex_sq(&[1.0, 1.0], &[a, b, c]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(point_simplex_sq(&[-1.0, -1.0], &[a, b, c]), 2.0, epsilon = 1e-15);
        // triangle in 3-D, point above the interior
        let t: [&[f64]; 3] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]];
        assert_abs_diff_eq!(point_simplex_sq(&[0.25, 0.25, 3.0], &t), 9.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn matches_dense_sampling(
            v in prop::collection::vec(-1.0f64..1.0, 6),
            p in prop::collection::vec(-2.0f64..2.0, 2),
        ) {
            let verts: Vec<&[f64]> = v.chunks(2).collect();
            let exact = point_simplex_sq(&p, &verts).sqrt();
            let k = 60;
            let mut best = f64::INFINITY;
            for i in 0..=k {
                for j in 0..=k - i {
                    let (a, b) = (i as f64 / k as f64, j as f64 / k as f64);
                    let q: Vec<f64> = (0..2).map(|d| verts[0][d] * (1.0 - a - b) + verts[1][d] * a + verts[2][d] * b).collect();
                    best = best.min(sq(&p, &q).sqrt());
                }
            }
            prop_assert!(exact <= best + 1e-12);
            prop_assert!(best - exact <= 4.0 / k as f64);
        }
    }
}
