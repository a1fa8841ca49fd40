use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn seg(a: [f64; 2], b: [f64; 2]) -> Vec<Vec<f64>> {
    vec![a.to_vec(), b.to_vec()]
}

#[test]
fn identity_is_zero() {
    let a = SimplexSet::new(2, vec![seg([0.0, 0.0], [1.0, 0.0]), seg([1.0, 0.0], [1.0, 2.0])]);
    let r = hausdorff_sets(&a, &a, DEFAULT_DENSITY).unwrap();
    assert_eq!(r.hausdorff, 0.0);
    assert_eq!(r.mean_a_to_b, 0.0);
}

#[test]
fn two_points() {
    let a = SimplexSet::from_points(2, [vec![0.0, 0.0]]);
    let b = SimplexSet::from_points(2, [vec![3.0, 4.0]]);
    assert_eq!(hausdorff_sets(&a, &b, DEFAULT_DENSITY).unwrap().hausdorff, 5.0);
}

#[test]
fn segment_against_point() {
    let a = SimplexSet::new(2, vec![seg([0.0, 0.0], [1.0, 0.0])]);
    let b = SimplexSet::from_points(2, [vec![0.5, 2.0]]);
    let r = hausdorff_sets(&a, &b, DEFAULT_DENSITY).unwrap();
    assert_abs_diff_eq!(r.hausdorff, 4.25f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(r.mean_b_to_a, 2.0, epsilon = 1e-15);
    assert!(r.hausdorff >= r.mean_a_to_b.max(r.mean_b_to_a));
}

#[test]
fn empty_and_mismatch_errors() {
    let a = SimplexSet::from_points(2, [vec![0.0, 0.0]]);
    assert_eq!(hausdorff_sets(&a, &SimplexSet::new(2, vec![]), 5), Err(MetricsError::EmptyComplex));
    let b = SimplexSet::from_points(3, [vec![0.0, 0.0, 0.0]]);
    assert_eq!(hausdorff_sets(&a, &b, 5), Err(MetricsError::DimensionMismatch(2, 3)));
}

#[test]
fn slopes() {
    let quad: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&d| (d, d * d)).collect();
    assert_abs_diff_eq!(convergence_slope(&quad).unwrap(), 2.0, epsilon = 1e-12);
    let lin: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&d| (d, 3.0 * d)).collect();
    assert_abs_diff_eq!(convergence_slope(&lin).unwrap(), 1.0, epsilon = 1e-12);
    assert!(matches!(convergence_slope(&quad[..2]), Err(MetricsError::InsufficientData { .. })));
    assert_eq!(convergence_slope(&[(1.0, 0.0), (0.5, 1.0), (0.2, 1.0)]), Err(MetricsError::NonPositive));
}

#[test]
fn sample_counts() {
    let t = SimplexSet::new(2, vec![vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]]);
    assert_eq!(t.samples(4).len(), 15);
    assert_eq!(SimplexSet::new(2, vec![seg([0.0, 0.0], [1.0, 0.0])]).samples(4).len(), 5);
}

fn random_set(coords: &[f64]) -> SimplexSet {
    SimplexSet::new(2, coords.chunks(4).map(|c| seg([c[0], c[1]], [c[2], c[3]])).collect())
}

proptest! {
    #[test]
    fn symmetric_and_triangle(
        a in prop::collection::vec(-3.0f64..3.0, 4..16),
        b in prop::collection::vec(-3.0f64..3.0, 4..16),
        c in prop::collection::vec(-3.0f64..3.0, 4..16),
    ) {
        let trim = |v: Vec<f64>| { let k = v.len() / 4 * 4; random_set(&v[..k]) };
        let (a, b, c) = (trim(a), trim(b), trim(c));
        let k = 40;
        let ab = hausdorff_sets(&a, &b, k).unwrap();
        let ba = hausdorff_sets(&b, &a, k).unwrap();
        prop_assert_eq!(ab.hausdorff, ba.hausdorff);
        prop_assert!(ab.hausdorff >= ab.mean_a_to_b.max(ab.mean_b_to_a));
        let bc = hausdorff_sets(&b, &c, k).unwrap().hausdorff;
        let ac = hausdorff_sets(&a, &c, k).unwrap().hausdorff;
        // sampling resolution: longest segment / k on each side
        let res = 2.0 * 6.0 * 2f64.sqrt() / k as f64;
        prop_assert!(ac <= ab.hausdorff + bc + res);
    }

    #[test]
    fn doubling_density_is_stable(a in prop::collection::vec(-3.0f64..3.0, 8), b in prop::collection::vec(-3.0f64..3.0, 8)) {
        let (a, b) = (random_set(&a), random_set(&b));
        let k = 10;
        let coarse = hausdorff_sets(&a, &b, k).unwrap().hausdorff;
        let fine = hausdorff_sets(&a, &b, 2 * k).unwrap().hausdorff;
        let diam = a.simplices.iter().chain(&b.simplices).map(|s| {
            s[0].iter().zip(&s[1]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        }).fold(0.0, f64::max);
        prop_assert!((fine - coarse).abs() <= diam / k as f64 + 1e-12);
    }
}
