//! Hausdorff distances between simplicial sets and convergence-order estimates.

mod bvh;
mod distance;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{ParetoComplex, Stratum};

pub use bvh::Bvh;
pub use distance::point_simplex_sq;

/// Lattice subdivisions per simplex edge used when sampling.
pub const DEFAULT_DENSITY: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty complex")]
    EmptyComplex,
    #[error("ambient dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("convergence data must be positive and finite")]
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub hausdorff: f64,
    pub mean_a_to_b: f64,
    pub mean_b_to_a: f64,
    pub sample_count: usize,
}

impl DistanceReport {
    /// Fixed-field summary line.
    pub fn line(&self) -> String {
        format!(
            "hausdorff={:.6e} mean_a_to_b={:.6e} mean_b_to_a={:.6e} samples={}",
            self.hausdorff, self.mean_a_to_b, self.mean_b_to_a, self.sample_count
        )
    }
}

/// A finite union of simplices (points, segments, triangles, ...) in `R^dim`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimplexSet {
    pub dim: usize,
    pub simplices: Vec<Vec<Vec<f64>>>,
}

impl SimplexSet {
    pub fn new(dim: usize, simplices: Vec<Vec<Vec<f64>>>) -> Self {
        SimplexSet { dim, simplices }
    }

    /// Every point as a 0-simplex.
    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Vec<f64>>) -> Self {
        SimplexSet { dim, simplices: points.into_iter().map(|p| vec![p]).collect() }
    }

    /// Simplices of `c` whose stratum is in `strata`.
    pub fn from_complex(c: &ParetoComplex, strata: &[Stratum]) -> Self {
        SimplexSet { dim: c.ambient_dim, simplices: c.simplex_points(strata) }
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    /// Lattice points `sum_j (i_j / k) P_j` with `sum_j i_j = k` on every simplex.
    pub fn samples(&self, k: usize) -> Vec<Vec<f64>> {
        self.owned_samples(k).into_iter().map(|(p, _)| p).collect()
    }

    /// Lattice samples paired with the index of the simplex they come from.
    fn owned_samples(&self, k: usize) -> Vec<(Vec<f64>, usize)> {
        let k = k.max(1);
        let mut out = Vec::new();
        for (si, s) in self.simplices.iter().enumerate() {
            if s.len() == 1 {
                out.push((s[0].clone(), si));
                continue;
            }
            let mut idx = vec![0usize; s.len()];
            compositions(k, 0, &mut idx, &mut |w| {
                let p = (0..self.dim).map(|d| s.iter().zip(w).map(|(v, &i)| v[d] * i as f64).sum::<f64>() / k as f64);
                out.push((p.collect(), si));
            });
        }
        out
    }

    /// Order-independent identity of each simplex from the bits of its vertices.
    fn keys(&self) -> Vec<Vec<Vec<u64>>> {
        self.simplices
            .iter()
            .map(|s| {
                let mut k: Vec<Vec<u64>> = s.iter().map(|v| v.iter().map(|x| x.to_bits()).collect()).collect();
                k.sort_unstable();
                k
            })
            .collect()
    }
}

fn compositions(left: usize, pos: usize, idx: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pos + 1 == idx.len() {
        idx[pos] = left;
        f(idx);
        return;
    }
    for i in 0..=left {
        idx[pos] = i;
        compositions(left - i, pos + 1, idx, f);
    }
}

/// Sup and mean distance from `from`'s samples to `to`. Samples of a simplex
/// that `to` also contains are at distance zero, which avoids round-off in the
/// projection and makes a set's distance to itself exactly zero.
fn directed(from: &SimplexSet, to: &SimplexSet, tree: &Bvh, density: usize) -> (f64, f64, usize) {
    let shared: HashSet<Vec<Vec<u64>>> = to.keys().into_iter().collect();
    let inside: Vec<bool> = from.keys().iter().map(|k| shared.contains(k)).collect();
    let samples = from.owned_samples(density);
    let (max, sum) = samples
        .par_iter()
        .map(|(p, owner)| {
            let d = if inside[*owner] { 0.0 } else { tree.nearest(p) };
            (d, d)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1 + b.1));
    (max, sum / samples.len() as f64, samples.len())
}

/// Sampled Hausdorff distance between two simplex sets.
///
/// Each side is sampled on a barycentric lattice with `density` subdivisions
/// and measured exactly against the other side's simplices.
pub fn hausdorff_sets(a: &SimplexSet, b: &SimplexSet, density: usize) -> Result<DistanceReport, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyComplex);
    }
    if a.dim != b.dim {
        return Err(MetricsError::DimensionMismatch(a.dim, b.dim));
    }
    let (ta, tb) = (Bvh::new(a.simplices.clone()), Bvh::new(b.simplices.clone()));
    let (max_ab, mean_ab, na) = directed(a, b, &tb, density);
    let (max_ba, mean_ba, nb) = directed(b, a, &ta, density);
    Ok(DistanceReport { hausdorff: max_ab.max(max_ba), mean_a_to_b: mean_ab, mean_b_to_a: mean_ba, sample_count: na + nb })
}

/// Hausdorff distance between all simplices of two complexes.
pub fn hausdorff(a: &ParetoComplex, b: &ParetoComplex, density: usize) -> Result<DistanceReport, MetricsError> {
    hausdorff_sets(&SimplexSet::from_complex(a, &Stratum::ALL), &SimplexSet::from_complex(b, &Stratum::ALL), density)
}

/// Least-squares slope of `log d` against `log delta`.
pub fn convergence_slope(pairs: &[(f64, f64)]) -> Result<f64, MetricsError> {
    if pairs.len() < 3 {
        return Err(MetricsError::InsufficientData { needed: 3, got: pairs.len() });
    }
    if pairs.iter().any(|&(d, e)| !(d > 0.0 && e > 0.0 && d.is_finite() && e.is_finite())) {
        return Err(MetricsError::NonPositive);
    }
    let pts: Vec<(f64, f64)> = pairs.iter().map(|&(d, e)| (d.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(MetricsError::InsufficientData { needed: 2, got: 1 });
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests;
