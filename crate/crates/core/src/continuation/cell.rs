//! Analysis of a single simplex: singular vertices, the polytope they span and
//! its successive clips by the multipliers and by stability.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::clip::clip_polytope;
use super::hessian::{generalized_hessian, interpolate_hessians, kernel_basis};
use super::lambda::solve_lambda;
use super::{ContinuationError, MarkerKind, Order, Stratum, VertexKey, EPS_ACCEPT, EPS_RES, EPS_SUPPORT};
use crate::tessellation::{enumerate_faces, NodeSet};

/// Where second derivatives come from.
#[derive(Clone, Copy)]
pub enum HessianSource<'a> {
    None,
    /// Analytic Hessians per node (`[node][objective]`).
    Nodal(&'a [Vec<DMatrix<f64>>]),
    /// Finite-difference Hessians per cell; a face uses the cell listed in `owner`.
    Cells { per_cell: &'a [Option<Vec<DMatrix<f64>>>], owner: &'a HashMap<Vec<usize>, usize> },
}

/// Read-only data needed to analyze one cell.
#[derive(Clone, Copy)]
pub struct CellInput<'a> {
    pub cell: usize,
    /// Node ids of the simplex.
    pub nodes: &'a [usize],
    pub coords: &'a NodeSet,
    /// Gradient rows (`m x dim`) per node.
    pub jacobians: &'a [DMatrix<f64>],
    /// Minor values per node; empty vectors select whole-cell mode (`m > n`).
    pub minors: &'a [Vec<f64>],
    pub hessians: HessianSource<'a>,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VertexFlags {
    pub rank_collapse: bool,
    pub non_critical: bool,
    pub kernel_mismatch: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularVertex {
    pub key: VertexKey,
    pub face: Vec<usize>,
    pub mu: Vec<f64>,
    pub position: Vec<f64>,
    pub lambda: Option<Vec<f64>>,
    pub residual: f64,
    pub relative_residual: f64,
    pub grad_interp: DMatrix<f64>,
    pub hessian_eigs: Option<Vec<f64>>,
    pub flags: VertexFlags,
}

impl SingularVertex {
    /// Valid multipliers with a small enough residual.
    pub fn lambda_usable(&self) -> bool {
        self.lambda.is_some() && !self.flags.non_critical
    }
}

/// A vertex of the cell's polytopes: a singular vertex or a clip vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVertex {
    pub key: VertexKey,
    pub x: Vec<f64>,
    pub lambda: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    /// One scalar per clip stage: the multipliers, then stability `-max sigma`.
    /// Ineligible vertices carry `-1`.
    pub scalars: Vec<f64>,
    /// `(lo, hi, t)` for clip vertices, located at `x_lo + t (x_hi - x_lo)`.
    pub origin: Option<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub vertices: Vec<usize>,
    pub stratum: Stratum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAnalysis {
    pub cell: usize,
    pub singular_vertices: Vec<SingularVertex>,
    /// Arena; the first `singular_vertices.len()` entries mirror the singular vertices.
    pub vertices: Vec<PolyVertex>,
    pub sigma_polytope: Vec<usize>,
    pub theta_polytope: Vec<usize>,
    pub stable_polytope: Vec<usize>,
    pub pieces: Vec<Piece>,
    pub markers: Vec<(usize, MarkerKind)>,
    pub transversality_warning: bool,
    pub degenerate: bool,
    pub skipped_faces: usize,
    pub whole_cell: bool,
    pub order: Order,
}

impl CellAnalysis {
    fn empty(cell: usize) -> Self {
        CellAnalysis {
            cell,
            singular_vertices: Vec::new(),
            vertices: Vec::new(),
            sigma_polytope: Vec::new(),
            theta_polytope: Vec::new(),
            stable_polytope: Vec::new(),
            pieces: Vec::new(),
            markers: Vec::new(),
            transversality_warning: false,
            degenerate: false,
            skipped_faces: 0,
            whole_cell: false,
            order: Order::First,
        }
    }

    fn split(&mut self, a: usize, b: usize, stage: usize) -> usize {
        let (lo, hi) = if self.vertices[a].key <= self.vertices[b].key { (a, b) } else { (b, a) };
        let (vl, vh) = (&self.vertices[lo], &self.vertices[hi]);
        let t = vl.scalars[stage] / (vl.scalars[stage] - vh.scalars[stage]);
        let key = VertexKey::Split { lo: Box::new(vl.key.clone()), hi: Box::new(vh.key.clone()), stage };
        if let Some(i) = self.vertices.iter().position(|v| v.key == key) {
            return i;
        }
        let mut scalars = lerp(&vl.scalars, &vh.scalars, t);
        scalars[stage] = 0.0;
        let v = PolyVertex {
            key,
            x: lerp(&vl.x, &vh.x, t),
            lambda: lerp_opt(&vl.lambda, &vh.lambda, t),
            sigma: lerp_opt(&vl.sigma, &vh.sigma, t),
            scalars,
            origin: Some((lo, hi, t)),
        };
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    fn push_marker(&mut self, v: usize, kind: MarkerKind) {
        if !self.markers.iter().any(|&(w, k)| w == v && k == kind) {
            self.markers.push((v, kind));
        }
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn lerp_opt(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>, t: f64) -> Option<Vec<f64>> {
    match (a, b) {
        (Some(a), Some(b)) if a.len() == b.len() => Some(lerp(a, b, t)),
        _ => None,
    }
}

fn fill_lambda(v: &mut SingularVertex) {
    match solve_lambda(&v.grad_interp) {
        Ok(sol) => {
            v.flags.non_critical = sol.relative_residual > EPS_RES;
            v.residual = sol.residual;
            v.relative_residual = sol.relative_residual;
            v.lambda = Some(sol.lambda);
        }
        Err(_) => {
            v.flags.rank_collapse = true;
            v.residual = f64::NAN;
            v.relative_residual = f64::NAN;
        }
    }
}

fn interp_gradient(input: &CellInput, face: &[usize], mu: &[f64]) -> DMatrix<f64> {
    let mut g = input.jacobians[face[0]].clone() * mu[0];
    for (&id, &w) in face.iter().zip(mu).skip(1) {
        g += &input.jacobians[id] * w;
    }
    g
}

/// Singular vertices of one cell with their multipliers, deduplicated by key and
/// sorted by key. Also returns the number of faces whose system was singular.
pub fn singular_vertices_of_cell(input: &CellInput) -> (Vec<SingularVertex>, usize) {
    let r = input.minors[input.nodes[0]].len();
    let dim = input.coords.dim();
    let mut out: Vec<SingularVertex> = Vec::new();
    let mut skipped = 0;
    for face in enumerate_faces(input.nodes, r) {
        // A minor of one strict sign on the whole face has no root there.
        let one_signed = (0..r).any(|j| {
            face.iter().all(|&id| input.minors[id][j] > 0.0) || face.iter().all(|&id| input.minors[id][j] < 0.0)
        });
        if one_signed {
            continue;
        }
        let mut a = DMatrix::zeros(r + 1, r + 1);
        let mut usable = true;
        for j in 0..r {
            let scale = face.iter().map(|&id| input.minors[id][j].abs()).fold(0.0, f64::max);
            if scale == 0.0 || !scale.is_finite() {
                usable = false;
                break;
            }
            for (k, &id) in face.iter().enumerate() {
                a[(j, k)] = input.minors[id][j] / scale;
            }
        }
        if !usable {
            skipped += 1;
            log::debug!("{}", ContinuationError::SingularLinearSystem(face.clone()));
            continue;
        }
        for k in 0..=r {
            a[(r, k)] = 1.0;
        }
        let mut rhs = DVector::zeros(r + 1);
        rhs[r] = 1.0;
        let Some(mu) = a.lu().solve(&rhs).filter(|mu| mu.iter().all(|v| v.is_finite())) else {
            skipped += 1;
            log::debug!("{}", ContinuationError::SingularLinearSystem(face.clone()));
            continue;
        };
        if mu.iter().any(|&w| w < -EPS_ACCEPT) {
            continue;
        }
        let support: Vec<usize> = face.iter().zip(mu.iter()).filter(|(_, &w)| w > EPS_SUPPORT).map(|(&id, _)| id).collect();
        let key = VertexKey::Support(support);
        if out.iter().any(|v| v.key == key) {
            continue;
        }
        let mu: Vec<f64> = mu.iter().copied().collect();
        let mut position = vec![0.0; dim];
        for (&id, &w) in face.iter().zip(&mu) {
            for (x, p) in position.iter_mut().zip(input.coords.point(id)) {
                *x += w * p;
            }
        }
        let grad_interp = interp_gradient(input, &face, &mu);
        let mut v = SingularVertex {
            key,
            face,
            mu,
            position,
            lambda: None,
            residual: 0.0,
            relative_residual: 0.0,
            grad_interp,
            hessian_eigs: None,
            flags: VertexFlags::default(),
        };
        fill_lambda(&mut v);
        out.push(v);
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    (out, skipped)
}

fn whole_cell_vertices(input: &CellInput) -> Vec<SingularVertex> {
    let mut nodes = input.nodes.to_vec();
    nodes.sort_unstable();
    nodes
        .into_iter()
        .map(|id| {
            let mut v = SingularVertex {
                key: VertexKey::Support(vec![id]),
                face: vec![id],
                mu: vec![1.0],
                position: input.coords.point(id).to_vec(),
                lambda: None,
                residual: 0.0,
                relative_residual: 0.0,
                grad_interp: input.jacobians[id].clone(),
                hessian_eigs: None,
                flags: VertexFlags::default(),
            };
            fill_lambda(&mut v);
            v
        })
        .collect()
}

/// Cyclic order of planar points by angle around their centroid in the best-fit plane.
fn polygon_order(points: &[&[f64]]) -> Vec<usize> {
    let k = points.len();
    let dim = points[0].len();
    let mut c = vec![0.0; dim];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p.iter()) {
            *ci += pi / k as f64;
        }
    }
    let d = DMatrix::from_fn(k, dim, |i, j| points[i][j] - c[j]);
    let (e1, e2) = if dim == 2 {
        (DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0]))
    } else {
        let v_t = d.clone().svd(false, true).v_t.expect("right singular vectors requested");
        (v_t.row(0).transpose(), v_t.row(1).transpose())
    };
    let angles: Vec<f64> = (0..k)
        .map(|i| {
            let row = d.row(i).transpose();
            row.dot(&e2).atan2(row.dot(&e1))
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
    order
}

fn build_sigma(analysis: &mut CellAnalysis, simplex_dim: usize) {
    let k = analysis.vertices.len();
    analysis.sigma_polytope = match simplex_dim {
        1 if k == 2 => vec![0, 1],
        1 if k > 2 => {
            analysis.transversality_warning = true;
            let mut best = (0, 1, -1.0);
            for i in 0..k {
                for j in i + 1..k {
                    let d: f64 =
                        analysis.vertices[i].x.iter().zip(&analysis.vertices[j].x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d > best.2 {
                        best = (i, j, d);
                    }
                }
            }
            vec![best.0, best.1]
        }
        2 if k >= 3 => {
            let pts: Vec<&[f64]> = analysis.vertices.iter().map(|v| v.x.as_slice()).collect();
            polygon_order(&pts)
        }
        _ => Vec::new(),
    };
}

/// Singular polytope and its clip by `lambda_j >= 0`. Clipped-away parts become
/// singular-only pieces; what remains is labeled critical (unstable until a
/// stability pass runs).
pub fn analyze_cell_first_order(input: &CellInput) -> CellAnalysis {
    let m = input.m;
    let mut analysis = CellAnalysis::empty(input.cell);
    let whole_cell = input.minors[input.nodes[0]].is_empty();
    analysis.whole_cell = whole_cell;
    let simplex_dim = if whole_cell { input.nodes.len() - 1 } else { m - 1 };

    if !whole_cell && input.nodes.iter().all(|&id| input.minors[id].iter().all(|&w| w == 0.0)) {
        analysis.degenerate = true;
        return analysis;
    }
    let singular = if whole_cell {
        whole_cell_vertices(input)
    } else {
        let (v, skipped) = singular_vertices_of_cell(input);
        analysis.skipped_faces = skipped;
        v
    };
    analysis.vertices = singular
        .iter()
        .map(|v| {
            let mut scalars = vec![-1.0; m + 1];
            if v.lambda_usable() {
                scalars[..m].copy_from_slice(v.lambda.as_deref().unwrap());
            }
            PolyVertex {
                key: v.key.clone(),
                x: v.position.clone(),
                lambda: v.lambda.clone(),
                sigma: None,
                scalars,
                origin: None,
            }
        })
        .collect();
    analysis.singular_vertices = singular;
    build_sigma(&mut analysis, simplex_dim);

    let mut current = analysis.sigma_polytope.clone();
    let mut boundary = Vec::new();
    for stage in 0..m {
        if current.is_empty() {
            break;
        }
        let vals: Vec<f64> = current.iter().map(|&v| analysis.vertices[v].scalars[stage]).collect();
        let clip = clip_polytope(&current, &vals, |a, b| analysis.split(a, b, stage));
        boundary.extend(clip.boundary);
        if let Some(neg) = clip.negative {
            analysis.pieces.push(Piece { vertices: neg, stratum: Stratum::SingularOnly });
        }
        current = clip.positive.unwrap_or_default();
    }
    for v in boundary {
        if analysis.vertices[v].scalars[..m].iter().all(|&s| s >= 0.0) {
            analysis.push_marker(v, MarkerKind::CriticalityBoundary);
        }
    }
    if !current.is_empty() {
        analysis.pieces.push(Piece { vertices: current.clone(), stratum: Stratum::CriticalUnstable });
    }
    analysis.theta_polytope = current;
    analysis
}

fn vertex_hessians(input: &CellInput, v: &SingularVertex) -> Option<Vec<DMatrix<f64>>> {
    match input.hessians {
        HessianSource::None => None,
        HessianSource::Nodal(h) => {
            let nodal: Vec<&[DMatrix<f64>]> = v.face.iter().map(|&id| h[id].as_slice()).collect();
            Some(interpolate_hessians(&v.mu, &nodal))
        }
        HessianSource::Cells { per_cell, owner } => {
            let c = owner.get(&v.face).copied().unwrap_or(input.cell);
            per_cell[c].clone()
        }
    }
}

/// Stability of the critical part: `-max sigma` at every vertex, then the clip
/// of the critical polytope into stable and unstable pieces with cusp markers.
pub fn analyze_cell_second_order(input: &CellInput, mut analysis: CellAnalysis) -> CellAnalysis {
    let m = input.m;
    analysis.order = Order::Second;
    for i in 0..analysis.vertices.len() {
        if let Some((lo, hi, t)) = analysis.vertices[i].origin {
            let (vl, vh) = (&analysis.vertices[lo], &analysis.vertices[hi]);
            let s = vl.scalars[m] + t * (vh.scalars[m] - vl.scalars[m]);
            let sigma = lerp_opt(&vl.sigma, &vh.sigma, t);
            let v = &mut analysis.vertices[i];
            v.scalars[m] = s;
            v.sigma = sigma;
            continue;
        }
        if analysis.whole_cell {
            analysis.vertices[i].scalars[m] = 1.0;
            continue;
        }
        let sv = &analysis.singular_vertices[i];
        let mut s = -1.0;
        let mut eigs = None;
        let mut mismatch = false;
        if let (Some(lambda), Some(h)) = (sv.lambda.as_ref(), vertex_hessians(input, sv)) {
            match kernel_basis(&sv.grad_interp) {
                Ok(w) => {
                    let e = generalized_hessian(lambda, &h, &w);
                    s = -e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    eigs = Some(e);
                }
                Err(err) => {
                    log::debug!("cell {}: {err}", input.cell);
                    mismatch = true;
                }
            }
        }
        let sv = &mut analysis.singular_vertices[i];
        sv.flags.kernel_mismatch = mismatch;
        sv.hessian_eigs = eigs.clone();
        analysis.vertices[i].scalars[m] = s;
        analysis.vertices[i].sigma = eigs;
    }

    analysis.pieces.retain(|p| p.stratum == Stratum::SingularOnly);
    let theta = analysis.theta_polytope.clone();
    if theta.is_empty() {
        return analysis;
    }
    let vals: Vec<f64> = theta.iter().map(|&v| analysis.vertices[v].scalars[m]).collect();
    let clip = clip_polytope(&theta, &vals, |a, b| analysis.split(a, b, m));
    if let Some(neg) = clip.negative {
        analysis.pieces.push(Piece { vertices: neg, stratum: Stratum::CriticalUnstable });
    }
    if let Some(pos) = clip.positive {
        analysis.stable_polytope = pos.clone();
        analysis.pieces.push(Piece { vertices: pos, stratum: Stratum::CriticalStable });
    }
    for v in clip.boundary {
        analysis.push_marker(v, MarkerKind::Cusp);
    }
    analysis
}

/// First-order analysis, followed by the stability pass when `order` asks for it.
pub fn analyze_cell(input: &CellInput, order: Order) -> CellAnalysis {
    let first = analyze_cell_first_order(input);
    match order {
        Order::First => first,
        Order::Second => analyze_cell_second_order(input, first),
    }
}
