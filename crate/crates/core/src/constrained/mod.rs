//! First-order analysis on an equality-constrained manifold `{g = 0}` meshed by
//! `d`-simplices embedded in `R^n`.

mod icosphere;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::continuation::{analyze_cells, glue, with_threads, ContinuationError, NodalCache, Order, ParetoComplex};
use crate::problems::{ConstrainedProblem, EqualityConstraint};
use crate::tessellation::{MeshFile, NodeSet, TessellationError};

pub use icosphere::icosphere_points;

/// Largest accepted `|g(P)|` at a mesh node.
pub const EPS_CONSTRAINT: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstrainedError {
    #[error("constraint Jacobian is rank deficient at {0:?}")]
    RankDeficientConstraint(Vec<f64>),
    #[error("stacked gradient matrix is {rows} x {cols}; only the square case is supported")]
    NonSquareUnsupported { rows: usize, cols: usize },
    #[error("node {node} violates the constraint by {residual:.3e}")]
    ConstraintViolated { node: usize, residual: f64 },
    #[error("invalid manifold mesh: {0}")]
    InvalidMesh(String),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
}

/// A simplicial approximation of the manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMesh {
    pub nodes: NodeSet,
    /// Each cell lists `d + 1` node ids.
    pub cells: Vec<Vec<usize>>,
    /// `|g(P)|` per node.
    pub residuals: Vec<f64>,
}

impl ManifoldMesh {
    /// Validates `cells` and records constraint residuals.
    pub fn new(
        nodes: NodeSet,
        cells: Vec<Vec<usize>>,
        constraint: &dyn EqualityConstraint,
    ) -> Result<Self, ConstrainedError> {
        let d = nodes.dim() - constraint.count();
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != d + 1 || cell.iter().any(|&i| i >= nodes.len()) {
                return Err(ConstrainedError::InvalidMesh(format!("cell {c} is not a {d}-simplex of the node set")));
            }
        }
        let residuals: Vec<f64> = nodes
            .iter()
            .map(|p| constraint.value(p).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        if let Some((node, &residual)) = residuals.iter().enumerate().find(|(_, &r)| !(r < EPS_CONSTRAINT)) {
            return Err(ConstrainedError::ConstraintViolated { node, residual });
        }
        Ok(ManifoldMesh { nodes, cells, residuals })
    }

    /// Icosahedral mesh of the unit sphere after `subdiv` midpoint refinements.
    pub fn icosphere(subdiv: usize, constraint: &dyn EqualityConstraint) -> Result<Self, ConstrainedError> {
        let (pts, tris) = icosphere_points(subdiv);
        let nodes = NodeSet::from_points(&pts)?;
        let cells = tris.iter().map(|t| t.to_vec()).collect();
        ManifoldMesh::new(nodes, cells, constraint)
    }

    /// Simplex dimension `d`.
    pub fn manifold_dim(&self) -> usize {
        self.cells.first().map_or(0, |c| c.len() - 1)
    }

    pub fn to_mesh_file(&self) -> MeshFile {
        MeshFile {
            dim: self.manifold_dim(),
            embedding_dim: self.nodes.dim(),
            nodes: self.nodes.iter().map(<[f64]>::to_vec).collect(),
            cells: self.cells.clone(),
        }
    }

    pub fn from_mesh_file(file: &MeshFile, constraint: &dyn EqualityConstraint) -> Result<Self, ConstrainedError> {
        let nodes = NodeSet::from_points(&file.nodes)?;
        if nodes.dim() != file.embedding_dim {
            return Err(ConstrainedError::InvalidMesh("embedding dimension does not match the nodes".into()));
        }
        ManifoldMesh::new(nodes, file.cells.clone(), constraint)
    }
}

fn tangent_projector(dg: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>, ConstrainedError> {
    let n = dg.ncols();
    let gram = dg * dg.transpose();
    let inv = gram.clone().try_inverse().filter(|_| {
        let sv = gram.singular_values();
        sv.min() > 1e-12 * sv.max()
    });
    let inv = inv.ok_or_else(|| ConstrainedError::RankDeficientConstraint(x.to_vec()))?;
    Ok(DMatrix::identity(n, n) - dg.transpose() * inv * dg)
}

/// Objective gradients projected onto the tangent space `ker Dg(x)`, as rows.
pub fn project_gradients(cp: &ConstrainedProblem, x: &[f64]) -> Result<DMatrix<f64>, ConstrainedError> {
    let dg = cp.constraint.jacobian(x);
    let proj = tangent_projector(&dg, x)?;
    Ok(cp.base.jacobian(x) * proj)
}

/// `det(Dg_1, ..., Dg_k, Du_1, ..., Du_m)` with the gradients as rows; needs `k + m = n`.
pub fn augmented_minors(cp: &ConstrainedProblem, x: &[f64]) -> Result<Vec<f64>, ConstrainedError> {
    let dg = cp.constraint.jacobian(x);
    let du = cp.base.jacobian(x);
    let (k, m, n) = (dg.nrows(), du.nrows(), du.ncols());
    if k + m != n {
        return Err(ConstrainedError::NonSquareUnsupported { rows: k + m, cols: n });
    }
    let stacked = DMatrix::from_fn(n, n, |i, j| if i < k { dg[(i, j)] } else { du[(i - k, j)] });
    Ok(vec![stacked.determinant()])
}

/// Singular and critical sets of `cp` on `mesh`, clipped by `lambda >= 0` only.
///
/// Cells whose augmented minors vanish at every node (for example two objectives
/// with opposite gradients) are reported in the diagnostics as degenerate.
pub fn analyze_constrained(
    cp: &ConstrainedProblem,
    mesh: &ManifoldMesh,
    threads: Option<usize>,
) -> Result<ParetoComplex, ConstrainedError> {
    let run = || -> Result<ParetoComplex, ConstrainedError> {
        let nodal: Vec<_> = (0..mesh.nodes.len())
            .into_par_iter()
            .map(|id| {
                let x = mesh.nodes.point(id);
                Ok((cp.base.eval(x), project_gradients(cp, x)?, augmented_minors(cp, x)?))
            })
            .collect::<Result<_, ConstrainedError>>()?;
        let (mut values, mut jac, mut minors) = (Vec::new(), Vec::new(), Vec::new());
        for (v, j, w) in nodal {
            values.push(v);
            jac.push(j);
            minors.push(w);
        }
        let cache = NodalCache::from_parts(values, jac, minors);
        let analyses = analyze_cells(&mesh.nodes, &mesh.cells, &cache, cp.base.m(), Order::First);
        let eval = |x: &[f64]| cp.base.eval(x);
        Ok(glue(&analyses, mesh.nodes.dim(), cp.base.m(), &eval))
    };
    Ok(with_threads(threads, run)??)
}

#[cfg(test)]
mod tests;
