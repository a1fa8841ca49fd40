//! Starting node sets: regular grids and seeded uniform samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NodeSet;

/// Regular grid with `counts[k]` equally spaced nodes along axis `k`,
/// endpoints included. The last axis varies fastest.
pub fn structured_grid(domain: &[(f64, f64)], counts: &[usize]) -> NodeSet {
    assert_eq!(domain.len(), counts.len(), "one count per axis");
    let n = domain.len();
    let axes: Vec<Vec<f64>> = domain
        .iter()
        .zip(counts)
        .map(|(&(a, b), &c)| {
            if c <= 1 {
                vec![0.5 * (a + b)]
            } else {
                (0..c).map(|i| a + (b - a) * i as f64 / (c - 1) as f64).collect()
            }
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * n);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        for k in 0..n {
            coords.push(axes[k][idx[k]]);
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    NodeSet::from_flat(n, coords).expect("grid coordinates are finite")
}

/// `count` points drawn uniformly from the box with a ChaCha8 stream.
pub fn random_nodes(domain: &[(f64, f64)], count: usize, seed: u64) -> NodeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.len();
    let mut coords = Vec::with_capacity(count * n);
    for _ in 0..count {
        for &(a, b) in domain {
            coords.push(a + (b - a) * rng.gen::<f64>());
        }
    }
    NodeSet::from_flat(n, coords).expect("random coordinates are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_corners() {
        let g = structured_grid(&[(0.0, 1.0), (-1.0, 1.0)], &[3, 5]);
        assert_eq!(g.len(), 15);
        assert_eq!(g.point(0), &[0.0, -1.0]);
        assert_eq!(g.point(14), &[1.0, 1.0]);
        assert_eq!(g.point(1), &[0.0, -0.5]);
    }

    #[test]
    fn random_is_seeded() {
        let d = [(0.0, 1.0), (2.0, 3.0)];
        assert_eq!(random_nodes(&d, 10, 7), random_nodes(&d, 10, 7));
        assert_ne!(random_nodes(&d, 10, 7), random_nodes(&d, 10, 8));
        let r = random_nodes(&d, 100, 1);
        assert!(r.iter().all(|p| (0.0..=1.0).contains(&p[0]) && (2.0..=3.0).contains(&p[1])));
    }
}
