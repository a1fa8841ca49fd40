//! Nodal caches and the parallel per-cell analysis of a tessellation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::{analyze_cell, CellAnalysis, CellInput, HessianSource};
use super::complex::{glue, ParetoComplex};
use super::hessian::finite_difference_hessians;
use super::{ContinuationError, MinorSelection, Order};
use crate::problems::VectorProblem;
use crate::tessellation::{enumerate_faces, NodeSet, Tessellation};

/// `omega(x)` for the problem's Jacobian at `x`.
pub fn minor_values(p: &dyn VectorProblem, sel: &MinorSelection, x: &[f64]) -> Vec<f64> {
    sel.values(&p.jacobian(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianMode {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub order: Order,
    pub hessians: HessianMode,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

/// Derivative data at every node, computed once and then shared read-only.
#[derive(Debug, Clone, Default)]
pub struct NodalCache {
    pub values: Vec<Vec<f64>>,
    pub jacobians: Vec<DMatrix<f64>>,
    pub minors: Vec<Vec<f64>>,
    /// Present when analytic Hessians were requested and available.
    pub hessians: Option<Vec<Vec<DMatrix<f64>>>>,
}

impl NodalCache {
    /// Evaluates `p` at all nodes in parallel.
    pub fn compute(
        p: &dyn VectorProblem,
        sel: &MinorSelection,
        nodes: &NodeSet,
        with_hessians: bool,
    ) -> Result<Self, ContinuationError> {
        let mut cache = NodalCache { hessians: with_hessians.then(Vec::new), ..NodalCache::default() };
        cache.extend(p, sel, nodes)?;
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.jacobians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jacobians.is_empty()
    }

    /// Evaluates the nodes of `nodes` beyond those already cached.
    pub fn extend(&mut self, p: &dyn VectorProblem, sel: &MinorSelection, nodes: &NodeSet) -> Result<(), ContinuationError> {
        let start = self.len();
        let whole_cell = p.m() > p.n();
        let want_h = self.hessians.is_some();
        let fresh: Vec<_> = (start..nodes.len())
            .into_par_iter()
            .map(|id| {
                let x = nodes.point(id);
                let jac = p.jacobian(x);
                let values = p.eval(x);
                let minors = if whole_cell { Vec::new() } else { sel.values(&jac) };
                let hess = if want_h { p.hessians(x) } else { None };
                let finite = jac.iter().all(|v| v.is_finite()) && minors.iter().all(|v| v.is_finite());
                (id, values, jac, minors, hess, finite)
            })
            .collect();
        for (id, values, jac, minors, hess, finite) in fresh {
            if !finite {
                return Err(ContinuationError::NonFinite(id));
            }
            self.values.push(values);
            self.jacobians.push(jac);
            self.minors.push(minors);
            if let Some(h) = self.hessians.as_mut() {
                match hess {
                    Some(hh) => h.push(hh),
                    None => {
                        self.hessians = None;
                    }
                }
            }
        }
        Ok(())
    }

    /// A cache built from precomputed nodal data, without Hessians.
    pub fn from_parts(values: Vec<Vec<f64>>, jacobians: Vec<DMatrix<f64>>, minors: Vec<Vec<f64>>) -> Self {
        NodalCache { values, jacobians, minors, hessians: None }
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub(crate) fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, ContinuationError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| ContinuationError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn check_supported(p: &dyn VectorProblem) -> Result<(), ContinuationError> {
    let (n, m) = (p.n(), p.m());
    if m < 2 {
        return Err(ContinuationError::Unsupported(format!("need at least two objectives, got {m}")));
    }
    if m > n && n > 2 {
        return Err(ContinuationError::Unsupported(format!("m > n only for n <= 2 (n = {n}, m = {m})")));
    }
    if m <= n && m > 3 {
        return Err(ContinuationError::Unsupported(format!("m = {m} objectives: polytopes beyond polygons")));
    }
    Ok(())
}

/// Analyzes every cell of `tess` and glues the result.
pub fn analyze(
    p: &dyn VectorProblem,
    tess: &Tessellation,
    opts: &AnalysisOptions,
) -> Result<(ParetoComplex, NodalCache), ContinuationError> {
    check_supported(p)?;
    with_threads(opts.threads, || {
        let need_h = opts.order == Order::Second && opts.hessians == HessianMode::Analytic;
        let cache = NodalCache::compute(p, &p.minor_selection(), tess.nodes(), need_h)?;
        let complex = run_cells(p, tess, &cache, opts)?;
        Ok((complex, cache))
    })?
}

/// Like [`analyze`], reusing a cache that covers all nodes of `tess`.
pub fn analyze_with_cache(
    p: &dyn VectorProblem,
    tess: &Tessellation,
    cache: &NodalCache,
    opts: &AnalysisOptions,
) -> Result<ParetoComplex, ContinuationError> {
    check_supported(p)?;
    with_threads(opts.threads, || run_cells(p, tess, cache, opts))?
}

/// Analyzes `cells` in parallel against a cache, each cell independently.
///
/// Stability uses the cache's analytic Hessians when present and per-cell
/// finite differences otherwise.
pub fn analyze_cells(
    nodes: &NodeSet,
    cells: &[Vec<usize>],
    cache: &NodalCache,
    m: usize,
    order: Order,
) -> Vec<CellAnalysis> {
    analyze_cells_with(nodes, cells, cache, m, order, false)
}

pub(crate) fn analyze_cells_with(
    nodes: &NodeSet,
    cells: &[Vec<usize>],
    cache: &NodalCache,
    m: usize,
    order: Order,
    fd_hessians: bool,
) -> Vec<CellAnalysis> {
    let fd = if order == Order::Second && (fd_hessians || cache.hessians.is_none()) {
        Some(fd_tables(nodes, cells, cache))
    } else {
        None
    };
    let source = match (&fd, &cache.hessians) {
        (Some((per_cell, owner)), _) if order == Order::Second => HessianSource::Cells { per_cell, owner },
        (_, Some(h)) => HessianSource::Nodal(h),
        _ => HessianSource::None,
    };
    (0..cells.len())
        .into_par_iter()
        .map(|c| {
            let input = CellInput {
                cell: c,
                nodes: &cells[c],
                coords: nodes,
                jacobians: &cache.jacobians,
                minors: &cache.minors,
                hessians: source,
                m,
            };
            analyze_cell(&input, order)
        })
        .collect()
}

type FdTables = (Vec<Option<Vec<DMatrix<f64>>>>, HashMap<Vec<usize>, usize>);

fn fd_tables(nodes: &NodeSet, cells: &[Vec<usize>], cache: &NodalCache) -> FdTables {
    let per_cell: Vec<Option<Vec<DMatrix<f64>>>> = cells
        .par_iter()
        .map(|cell| {
            let pts: Vec<&[f64]> = cell.iter().map(|&id| nodes.point(id)).collect();
            let grads: Vec<&DMatrix<f64>> = cell.iter().map(|&id| &cache.jacobians[id]).collect();
            finite_difference_hessians(&pts, &grads).ok()
        })
        .collect();
    let r = cache.minors.first().map_or(0, Vec::len);
    let mut owner: HashMap<Vec<usize>, usize> = HashMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for face in enumerate_faces(cell, r) {
            owner.entry(face).or_insert(c);
        }
    }
    (per_cell, owner)
}

fn run_cells(
    p: &dyn VectorProblem,
    tess: &Tessellation,
    cache: &NodalCache,
    opts: &AnalysisOptions,
) -> Result<ParetoComplex, ContinuationError> {
    if cache.len() < tess.nodes().len() {
        return Err(ContinuationError::Unsupported("nodal cache does not cover the tessellation".into()));
    }
    let fd = opts.hessians == HessianMode::FiniteDifference;
    if opts.order == Order::Second && !fd && cache.hessians.is_none() {
        log::warn!("{}: no analytic Hessians, using finite differences", p.name());
    }
    let analyses = analyze_cells_with(tess.nodes(), tess.cells(), cache, p.m(), opts.order, fd);
    let eval = |x: &[f64]| p.eval(x);
    Ok(glue(&analyses, p.n(), p.m(), &eval))
}
