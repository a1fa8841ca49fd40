use std::sync::Arc;

use super::*;
use crate::continuation::{MarkerKind, Stratum};
use crate::problems::{registry_get, AnalyticProblem, Derivatives, Problem};
use approx::assert_abs_diff_eq;

fn sphere_problem() -> ConstrainedProblem {
    match registry_get("sphere_proj").unwrap() {
        Problem::Constrained(c) => c,
        Problem::Unconstrained(_) => unreachable!(),
    }
}

#[test]
fn projected_gradients_match_closed_form() {
    let cp = sphere_problem();
    let at_x = project_gradients(&cp, &[1.0, 0.0, 0.0]).unwrap();
    assert_abs_diff_eq!(at_x.row(0).norm(), 0.0, epsilon = 1e-15);
    let at_pole = project_gradients(&cp, &[0.0, 0.0, 1.0]).unwrap();
    assert_abs_diff_eq!((at_pole - DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).amax(), 0.0, epsilon = 1e-15);
    // (1 - x1^2, -x1 x2, -x1 x3) for the first objective
    let x = [0.6, 0.0, 0.8];
    let p = project_gradients(&cp, &x).unwrap();
    for (k, want) in [1.0 - 0.36, 0.0, -0.48].iter().enumerate() {
        assert_abs_diff_eq!(p[(0, k)], *want, epsilon = 1e-14);
    }
}

#[test]
fn projected_gradients_are_tangent() {
    let cp = sphere_problem();
    let (pts, _) = icosphere_points(2);
    for x in &pts {
        let p = project_gradients(&cp, x).unwrap();
        let dg = cp.constraint.jacobian(x);
        assert!((p * dg.transpose()).amax() < 1e-10);
    }
}

#[test]
fn augmented_determinant_is_height() {
    let cp = sphere_problem();
    assert_abs_diff_eq!(augmented_minors(&cp, &[0.0, 0.0, 1.0]).unwrap()[0].abs(), 1.0, epsilon = 1e-14);
    assert_eq!(augmented_minors(&cp, &[0.6, 0.8, 0.0]).unwrap()[0], 0.0);
    let x = [0.48, 0.6, 0.64];
    assert_abs_diff_eq!(augmented_minors(&cp, &x).unwrap()[0].abs(), x[2], epsilon = 1e-14);
}

#[test]
fn determinant_sign_matches_tangent_orientation() {
    let cp = sphere_problem();
    let (pts, _) = icosphere_points(2);
    for x in pts.iter().filter(|p| p[2].abs() > 1e-9) {
        let n = nalgebra::Vector3::new(x[0], x[1], x[2]);
        let helper = if x[0].abs() < 0.9 { nalgebra::Vector3::x() } else { nalgebra::Vector3::y() };
        let t1 = n.cross(&helper).normalize();
        let t2 = n.cross(&t1);
        let p = project_gradients(&cp, x).unwrap();
        let row = |j: usize| nalgebra::Vector3::new(p[(j, 0)], p[(j, 1)], p[(j, 2)]);
        let orient = row(0).dot(&t1) * row(1).dot(&t2) - row(0).dot(&t2) * row(1).dot(&t1);
        let det = augmented_minors(&cp, x).unwrap()[0];
        assert_eq!(orient > 0.0, det > 0.0, "at {x:?}");
    }
}

#[test]
fn sphere_gives_closed_equator_and_two_arcs() {
    let cp = sphere_problem();
    let mesh = ManifoldMesh::icosphere(2, cp.constraint.as_ref()).unwrap();
    let c = analyze_constrained(&cp, &mesh, None).unwrap();
    let all = c.polylines(&Stratum::ALL);
    assert_eq!(all.len(), 1);
    assert!(all[0].closed);
    for v in &c.vertices {
        assert!(v.x[2].abs() < 1e-12);
    }
    let arcs = c.polylines(&[Stratum::CriticalUnstable, Stratum::CriticalStable]);
    assert_eq!(arcs.len(), 2);
    for arc in &arcs {
        for &v in &arc.vertices {
            let x = &c.vertices[v].x;
            assert!(x[0] * x[1] >= -1e-12, "critical vertex at {x:?}");
        }
    }
    assert_eq!(c.count_markers(MarkerKind::CriticalityBoundary), 4);
    for m in &c.markers {
        let near_axis = m.x[0].abs().min(m.x[1].abs());
        assert!(near_axis < 0.05, "marker at {:?}", m.x);
    }
}

#[test]
fn opposed_objectives_are_degenerate_everywhere() {
    let base = AnalyticProblem::new("opposed", vec![(-1.0, 1.0); 3], 2, |x| Derivatives {
        values: vec![x[0], -x[0]],
        jacobian: DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
        hessians: vec![DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)],
    });
    let cp = ConstrainedProblem { base: Arc::new(base), constraint: sphere_problem().constraint };
    let mesh = ManifoldMesh::icosphere(1, cp.constraint.as_ref()).unwrap();
    let c = analyze_constrained(&cp, &mesh, None).unwrap();
    assert_eq!(c.diagnostics.degenerate_cells, mesh.cells.len());
    assert!(c.simplices.is_empty());
}

#[test]
fn off_sphere_nodes_rejected() {
    let cp = sphere_problem();
    let nodes = NodeSet::from_points(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.1]]).unwrap();
    let err = ManifoldMesh::new(nodes, vec![vec![0, 1, 2]], cp.constraint.as_ref()).unwrap_err();
    assert!(matches!(err, ConstrainedError::ConstraintViolated { node: 2, .. }));
}

#[test]
fn mesh_file_round_trip() {
    let cp = sphere_problem();
    let mesh = ManifoldMesh::icosphere(1, cp.constraint.as_ref()).unwrap();
    let file = mesh.to_mesh_file();
    assert_eq!((file.dim, file.embedding_dim), (2, 3));
    assert_eq!(ManifoldMesh::from_mesh_file(&file, cp.constraint.as_ref()).unwrap(), mesh);
}
