//! Delaunay tessellations of sample nodes in `R^n`.
//!
//! Construction is incremental (Bowyer–Watson). Ties between cospherical or
//! collinear nodes are broken by displacing node `i` by `i * eps_geom` along a
//! fixed irrational direction; the displaced coordinates are seen only by the
//! geometric predicates, never by callers.

mod bowyer_watson;
mod grid;
pub mod predicates;

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use bowyer_watson::{InsertOutcome, Kernel};
pub use grid::{random_nodes, structured_grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TessellationError {
    #[error("need at least {needed} nodes in dimension {dim}, got {got}")]
    DimensionTooLow { dim: usize, needed: usize, got: usize },
    #[error("nodes are affinely dependent; no full-dimensional cell exists")]
    DegenerateInput,
    #[error("node coincides with existing node {existing}")]
    DuplicateNode { existing: usize },
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node set is empty or has dimension zero")]
    Empty,
    #[error("non-finite coordinate in node {0}")]
    NonFinite(usize),
}

/// A dense, ordered set of points of one dimension. The id of a node is its index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    dim: usize,
    coords: Vec<f64>,
}

impl NodeSet {
    pub fn new(dim: usize) -> Self {
        NodeSet { dim, coords: Vec::new() }
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self, TessellationError> {
        let dim = points.first().map(|p| p.as_ref().len()).ok_or(TessellationError::Empty)?;
        let mut set = NodeSet::new(dim);
        for p in points {
            set.push(p.as_ref())?;
        }
        Ok(set)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self, TessellationError> {
        if dim == 0 {
            return Err(TessellationError::Empty);
        }
        if coords.len() % dim != 0 {
            return Err(TessellationError::DimensionMismatch { expected: dim, got: coords.len() % dim });
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(TessellationError::NonFinite(i / dim));
        }
        Ok(NodeSet { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    /// Appends a point and returns its id.
    pub fn push(&mut self, p: &[f64]) -> Result<usize, TessellationError> {
        if p.len() != self.dim || self.dim == 0 {
            return Err(TessellationError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(TessellationError::NonFinite(self.len()));
        }
        self.coords.extend_from_slice(p);
        Ok(self.len() - 1)
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// An n-dimensional Delaunay simplicial complex over a [`NodeSet`].
#[derive(Debug, Clone)]
pub struct Tessellation {
    nodes: NodeSet,
    cells: Vec<Vec<usize>>,
    adjacency: HashMap<Vec<usize>, Vec<usize>>,
    kernel: Kernel,
    eps_geom: f64,
    direction: Vec<f64>,
}

/// Serializable view of a tessellation for debugging and exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub dim: usize,
    pub embedding_dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
}

/// Unit direction with irrational components, fractional parts of `sqrt(prime)`.
fn perturbation_direction(n: usize) -> Vec<f64> {
    const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let mut v: Vec<f64> = (0..n)
        .map(|k| {
            let s = (PRIMES[k % PRIMES.len()] as f64).sqrt();
            s.fract() + 0.1 * k as f64 / n as f64
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

impl Tessellation {
    /// Builds the Delaunay tessellation of `nodes`, inserting them in id order.
    pub fn build_delaunay(nodes: NodeSet) -> Result<Self, TessellationError> {
        let n = nodes.dim();
        if n == 0 {
            return Err(TessellationError::Empty);
        }
        if nodes.len() < n + 1 {
            return Err(TessellationError::DimensionTooLow { dim: n, needed: n + 1, got: nodes.len() });
        }
        let (lo, hi) = nodes.bounding_box();
        let diag = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        if diag == 0.0 {
            return Err(TessellationError::DuplicateNode { existing: 0 });
        }
        let eps_geom = 1e-12 * diag;
        let mut t = Tessellation {
            kernel: Kernel::new(&lo, &hi),
            nodes: NodeSet::new(n),
            cells: Vec::new(),
            adjacency: HashMap::new(),
            eps_geom,
            direction: perturbation_direction(n),
        };
        for p in nodes.iter() {
            t.insert_raw(p)?;
        }
        t.refresh()?;
        Ok(t)
    }

    fn perturbed(&self, id: usize, p: &[f64]) -> Vec<f64> {
        let shift = id as f64 * self.eps_geom;
        p.iter().zip(&self.direction).map(|(x, d)| x + shift * d).collect()
    }

    fn insert_raw(&mut self, p: &[f64]) -> Result<usize, TessellationError> {
        let n = self.nodes.dim();
        if p.len() != n {
            return Err(TessellationError::DimensionMismatch { expected: n, got: p.len() });
        }
        let id = self.nodes.len();
        let q = self.perturbed(id, p);
        let outcome = {
            let nodes = &self.nodes;
            let original_of = |v: usize| nodes.point(v - n - 1);
            self.kernel.insert(&q, p, original_of, self.eps_geom)?
        };
        self.nodes.push(p)?;
        if let InsertOutcome::Outside = outcome {
            self.rebuild_kernel()?;
        }
        Ok(id)
    }

    /// Recreates the kernel with a super-simplex enclosing every node.
    fn rebuild_kernel(&mut self) -> Result<(), TessellationError> {
        let (lo, hi) = self.nodes.bounding_box();
        let mut kernel = Kernel::new(&lo, &hi);
        let n = self.nodes.dim();
        for (id, p) in self.nodes.iter().enumerate() {
            let q = self.perturbed(id, p);
            let nodes = &self.nodes;
            let original_of = |v: usize| nodes.point(v - n - 1);
            match kernel.insert(&q, p, original_of, self.eps_geom)? {
                InsertOutcome::Inserted => {}
                InsertOutcome::Outside => unreachable!("super-simplex encloses the bounding box"),
            }
        }
        debug_assert_eq!(kernel.real_count(), self.nodes.len());
        debug_assert_eq!(kernel.dim(), n);
        self.kernel = kernel;
        Ok(())
    }

    /// Recomputes the public cell list and facet adjacency from the kernel.
    fn refresh(&mut self) -> Result<(), TessellationError> {
        let mut cells = self.kernel.real_cells();
        cells.sort_unstable();
        self.cells = cells;
        self.peel_flat_boundary_cells();
        if self.cells.is_empty() {
            return Err(TessellationError::DegenerateInput);
        }
        self.adjacency = facet_map(&self.cells);
        Ok(())
    }

    /// Removes hull cells whose unperturbed volume vanishes, e.g. triangles on
    /// three collinear boundary nodes of a structured grid.
    fn peel_flat_boundary_cells(&mut self) {
        loop {
            let adjacency = facet_map(&self.cells);
            let before = self.cells.len();
            let eps = self.eps_geom;
            let nodes = &self.nodes;
            self.cells.retain(|cell| {
                let on_hull = cell.iter().combinations(cell.len() - 1).any(|f| {
                    let key: Vec<usize> = f.into_iter().copied().collect();
                    adjacency.get(&key).map_or(0, |v| v.len()) == 1
                });
                !(on_hull && is_flat(nodes, cell, eps))
            });
            if self.cells.len() == before {
                break;
            }
        }
    }

    /// Inserts `p` and returns the updated tessellation; `self` is unchanged.
    pub fn insert_node(&self, p: &[f64]) -> Result<Tessellation, TessellationError> {
        let mut t = self.clone();
        t.insert_raw(p)?;
        t.refresh()?;
        Ok(t)
    }

    /// Inserts several points in order, refreshing the public view once.
    ///
    /// Returns the ids assigned to the inserted points. On error no point is kept.
    pub fn insert_nodes<P: AsRef<[f64]>>(&mut self, points: &[P]) -> Result<Vec<usize>, TessellationError> {
        let mut t = self.clone();
        let mut ids = Vec::with_capacity(points.len());
        for p in points {
            ids.push(t.insert_raw(p.as_ref())?);
        }
        t.refresh()?;
        *self = t;
        Ok(ids)
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    /// Cells as sorted node-id tuples, in lexicographic order.
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Map from each sorted (n-1)-facet to the indices of its incident cells.
    pub fn adjacency(&self) -> &HashMap<Vec<usize>, Vec<usize>> {
        &self.adjacency
    }

    /// Cells sharing a facet with cell `c`.
    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        let cell = &self.cells[c];
        let mut out = Vec::new();
        for f in cell.iter().copied().combinations(cell.len() - 1) {
            if let Some(list) = self.adjacency.get(&f) {
                out.extend(list.iter().copied().filter(|&o| o != c));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn eps_geom(&self) -> f64 {
        self.eps_geom
    }

    /// Coordinates of the vertices of cell `c`.
    pub fn cell_points(&self, c: usize) -> Vec<&[f64]> {
        self.cells[c].iter().map(|&v| self.nodes.point(v)).collect()
    }

    /// Unsigned volume of cell `c` from the unperturbed coordinates.
    pub fn cell_volume(&self, c: usize) -> f64 {
        simplex_volume(&self.cell_points(c))
    }

    /// Index of a cell containing `x` (closed), scanning all cells.
    pub fn find_cell(&self, x: &[f64]) -> Option<usize> {
        let tol = 1e-9;
        (0..self.cells.len()).find(|&c| {
            barycentric(&self.cell_points(c), x).is_some_and(|b| b.iter().all(|&w| w >= -tol))
        })
    }

    pub fn to_mesh_file(&self) -> MeshFile {
        MeshFile {
            dim: self.dim(),
            embedding_dim: self.dim(),
            nodes: self.nodes.iter().map(|p| p.to_vec()).collect(),
            cells: self.cells.clone(),
        }
    }
}

fn facet_map(cells: &[Vec<usize>]) -> HashMap<Vec<usize>, Vec<usize>> {
    let mut map: HashMap<Vec<usize>, Vec<usize>> = HashMap::with_capacity(cells.len() * 2);
    for (c, cell) in cells.iter().enumerate() {
        for f in cell.iter().copied().combinations(cell.len() - 1) {
            map.entry(f).or_default().push(c);
        }
    }
    map
}

fn is_flat(nodes: &NodeSet, cell: &[usize], eps: f64) -> bool {
    let pts: Vec<&[f64]> = cell.iter().map(|&v| nodes.point(v)).collect();
    let n = nodes.dim();
    let diam = diameter(&pts);
    signed_det(&pts).abs() <= eps * diam.powi(n as i32)
}

fn diameter(pts: &[&[f64]]) -> f64 {
    let mut best = 0.0f64;
    for (a, b) in pts.iter().tuple_combinations() {
        let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
        best = best.max(d2.sqrt());
    }
    best
}

/// Determinant of the edge vectors `p_i - p_0` of an n-simplex in `R^n`.
pub fn signed_det(pts: &[&[f64]]) -> f64 {
    let n = pts.len() - 1;
    let m = nalgebra::DMatrix::from_fn(n, n, |i, k| pts[i + 1][k] - pts[0][k]);
    m.determinant()
}

/// Unsigned volume of an n-simplex in `R^n`.
pub fn simplex_volume(pts: &[&[f64]]) -> f64 {
    let n = pts.len() - 1;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    signed_det(pts).abs() / fact
}

/// Barycentric coordinates of `x` with respect to an n-simplex in `R^n`.
pub fn barycentric(pts: &[&[f64]], x: &[f64]) -> Option<Vec<f64>> {
    let n = pts.len() - 1;
    let m = nalgebra::DMatrix::from_fn(n, n, |k, i| pts[i + 1][k] - pts[0][k]);
    let rhs = nalgebra::DVector::from_fn(n, |k, _| x[k] - pts[0][k]);
    let sol = m.lu().solve(&rhs)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0 - sol.sum());
    out.extend(sol.iter().copied());
    Some(out)
}

/// All k-dimensional faces of a cell, each as a sorted id tuple.
///
/// A cell with `n + 1` vertices has `C(n + 1, k + 1)` such faces.
pub fn enumerate_faces(cell: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k + 1 > cell.len() {
        return Vec::new();
    }
    let mut sorted = cell.to_vec();
    sorted.sort_unstable();
    sorted.into_iter().combinations(k + 1).collect()
}
