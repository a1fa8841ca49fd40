use super::*;
use crate::continuation::{analyze, ComplexSimplex, ComplexVertex, Diagnostics, VertexKey};
use crate::problems::registry_get;
use crate::tessellation::{barycentric, structured_grid};
use approx::assert_abs_diff_eq;

fn complex(points: &[[f64; 2]], simplices: &[&[usize]], stratum: Stratum) -> ParetoComplex {
    ParetoComplex {
        ambient_dim: 2,
        objectives: 2,
        vertices: points
            .iter()
            .enumerate()
            .map(|(i, p)| ComplexVertex {
                key: VertexKey::Support(vec![i]),
                x: p.to_vec(),
                u: vec![0.0, 0.0],
                lambda: None,
                sigma: None,
                source_cell: 0,
            })
            .collect(),
        simplices: simplices
            .iter()
            .map(|s| ComplexSimplex { vertices: s.to_vec(), stratum, source_cell: 0 })
            .collect(),
        markers: Vec::new(),
        diagnostics: Diagnostics::default(),
    }
}

fn xs(c: &[Candidate]) -> Vec<Vec<f64>> {
    c.iter().map(|c| c.x.clone()).collect()
}

#[test]
fn polyline_midpoint_rule() {
    let c = complex(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], &[&[0, 1], &[1, 2]], Stratum::CriticalStable);
    assert_eq!(xs(&resample_polyline(&c).unwrap()), vec![vec![0.5, 0.0], vec![1.5, 0.0]]);
    let single = complex(&[[0.0, 0.0], [2.0, 2.0]], &[&[0, 1]], Stratum::CriticalUnstable);
    assert_eq!(xs(&resample_polyline(&single).unwrap()), vec![vec![1.0, 1.0]]);
}

#[test]
fn closed_loop_starts_at_lowest_id() {
    let c = complex(
        &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
        Stratum::CriticalStable,
    );
    let got = xs(&resample_polyline(&c).unwrap());
    // from vertex 0 towards its lower neighbour 1
    let want = [[0.5, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 0.5]];
    assert_eq!(got.len(), 4);
    for (g, w) in got.iter().zip(want) {
        assert_abs_diff_eq!(g[0], w[0], epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], w[1], epsilon = 1e-15);
    }
}

#[test]
fn singular_only_complex_is_empty_for_refinement() {
    let c = complex(&[[0.0, 0.0], [1.0, 0.0]], &[&[0, 1]], Stratum::SingularOnly);
    assert_eq!(resample_polyline(&c), Err(RefinementError::EmptyComplex));
    assert_eq!(maximin_fill(&c, 1), Err(RefinementError::EmptyComplex));
}

#[test]
fn maximin_picks_middle_then_lowest() {
    let c = complex(&[[0.0, 0.0], [1.0, 0.0], [4.0, 0.0], [5.0, 0.0]], &[&[0, 1], &[1, 2], &[2, 3]], Stratum::CriticalStable);
    let picks = maximin_fill(&c, 3).unwrap();
    assert_eq!(picks.iter().map(|p| p.simplex).collect::<Vec<_>>(), vec![1, 0, 2]);
    assert_eq!(picks[0].x, vec![2.5, 0.0]);
}

#[test]
fn maximin_single_triangle_centroid_and_distinct_picks() {
    let c = complex(&[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]], &[&[0, 1, 2]], Stratum::CriticalStable);
    assert_eq!(xs(&maximin_fill(&c, 1).unwrap()), vec![vec![1.0, 1.0]]);
    let strip = complex(
        &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.5]],
        &[&[0, 1, 2], &[1, 2, 3], &[1, 3, 4]],
        Stratum::CriticalStable,
    );
    let mut picked: Vec<usize> = maximin_fill(&strip, 3).unwrap().iter().map(|p| p.simplex).collect();
    picked.sort_unstable();
    assert_eq!(picked, vec![0, 1, 2]);
}

#[test]
fn should_stop_thresholds() {
    let p = registry_get("triv").unwrap().unconstrained().unwrap();
    let tess = Tessellation::build_delaunay(structured_grid(p.domain(), &[12, 12])).unwrap();
    let state = RefinementState::new(p.as_ref(), tess, AnalysisOptions::default(), None).unwrap();
    assert!(!should_stop(&state, 0.0));
    assert!(should_stop(&state, state.last().max_minor * 1.0001 + 1e-300));
    assert!(!should_stop(&state, state.last().max_minor));
}

#[test]
fn one_iteration_inserts_points_inside_host_cells() {
    let p = registry_get("triv").unwrap().unconstrained().unwrap();
    let tess = Tessellation::build_delaunay(structured_grid(p.domain(), &[12, 12])).unwrap();
    let (c, _) = analyze(p.as_ref(), &tess, &AnalysisOptions::default()).unwrap();
    let cands = resample_polyline(&c).unwrap();
    for cand in &cands {
        let cell = c.simplices[cand.simplex].source_cell;
        let bary = barycentric(&tess.cell_points(cell), &cand.x).unwrap();
        assert!(bary.iter().all(|&b| b > -1e-9), "{bary:?}");
    }
    let state = RefinementState::new(p.as_ref(), tess, AnalysisOptions::default(), None).unwrap();
    let before = state.tess.nodes().len();
    let next = iterate(p.as_ref(), state, Scheme::Polyline, None).unwrap();
    assert!(next.tess.nodes().len() > before);
    assert_eq!(next.history.len(), 2);
    assert_eq!(next.iteration, 2);
    assert_eq!(next.history[1].iteration, 2);
}

#[test]
fn maximin_budget_caps_insertions() {
    let p = registry_get("locglob").unwrap().unconstrained().unwrap();
    let tess = Tessellation::build_delaunay(structured_grid(p.domain(), &[6, 10, 6])).unwrap();
    let state = RefinementState::new(p.as_ref(), tess, AnalysisOptions::default(), None).unwrap();
    let before = state.tess.nodes().len();
    let next = iterate(p.as_ref(), state, Scheme::Maximin, Some(5)).unwrap();
    let added = next.tess.nodes().len() - before;
    assert!(added >= 1 && added <= 5, "added {added}");
}

#[test]
fn history_csv_header_and_rows() {
    let h = [IterationStats { iteration: 1, nodes: 10, max_minor: 0.5, mean_minor: 0.25, hausdorff_to_ref: None }];
    let csv = history_csv(&h);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,nodes,max_minor,mean_minor,hausdorff_to_ref"));
    assert_eq!(lines.next(), Some("1,10,5.0000000000000000e-1,2.5000000000000000e-1,"));
}
