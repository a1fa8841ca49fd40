//! Iterative refinement: candidate points on the current critical set are added
//! to the node set and the analysis is repeated.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{
    analyze_with_cache, with_threads, AnalysisOptions, ContinuationError, HessianMode, NodalCache, Order,
    ParetoComplex, Stratum,
};
use crate::metrics::{hausdorff_sets, MetricsError, SimplexSet, DEFAULT_DENSITY};
use crate::problems::VectorProblem;
use crate::tessellation::{Tessellation, TessellationError};

/// Candidates closer than this fraction of the host cell's shortest edge to an
/// existing node are rejected.
pub const SPACING_GAMMA: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefinementError {
    #[error("the complex has no simplices to refine")]
    EmptyComplex,
    #[error("every candidate was rejected by the spacing guard")]
    NoProgress,
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Polyline,
    Maximin,
}

/// A proposed node and the complex simplex it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub simplex: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub nodes: usize,
    pub max_minor: f64,
    pub mean_minor: f64,
    pub hausdorff_to_ref: Option<f64>,
}

pub struct RefinementState {
    pub iteration: usize,
    pub tess: Tessellation,
    pub cache: NodalCache,
    pub complex: ParetoComplex,
    pub history: Vec<IterationStats>,
    pub options: AnalysisOptions,
    pub reference: Option<SimplexSet>,
}

/// Strata that refinement works on: stable critical if any, else all critical.
pub fn target_strata(c: &ParetoComplex) -> &'static [Stratum] {
    if c.count_stratum(Stratum::CriticalStable) > 0 {
        &[Stratum::CriticalStable]
    } else {
        &[Stratum::CriticalStable, Stratum::CriticalUnstable]
    }
}

/// `max_j |omega_j|` from the true Jacobian at `x`.
fn minor_magnitude(p: &dyn VectorProblem, x: &[f64]) -> f64 {
    if p.m() > p.n() {
        return 0.0;
    }
    p.minor_selection().values(&p.jacobian(x)).iter().fold(0.0, |a, w| a.max(w.abs()))
}

fn stats(
    p: &dyn VectorProblem,
    iteration: usize,
    tess: &Tessellation,
    c: &ParetoComplex,
    reference: Option<&SimplexSet>,
) -> Result<IterationStats, RefinementError> {
    let strata = target_strata(c);
    let verts = c.vertices_in(strata);
    let mags: Vec<f64> = verts.par_iter().map(|&v| minor_magnitude(p, &c.vertices[v].x)).collect();
    let max_minor = mags.iter().copied().fold(0.0, f64::max);
    let mean_minor = if mags.is_empty() { 0.0 } else { mags.iter().sum::<f64>() / mags.len() as f64 };
    let hausdorff_to_ref = match reference {
        Some(r) => {
            let own = SimplexSet::from_complex(c, strata);
            Some(hausdorff_sets(&own, r, DEFAULT_DENSITY)?.hausdorff)
        }
        None => None,
    };
    Ok(IterationStats { iteration, nodes: tess.nodes().len(), max_minor, mean_minor, hausdorff_to_ref })
}

impl RefinementState {
    /// Analyzes the initial tessellation; that analysis is iteration 1.
    pub fn new(
        p: &dyn VectorProblem,
        tess: Tessellation,
        options: AnalysisOptions,
        reference: Option<SimplexSet>,
    ) -> Result<Self, RefinementError> {
        let need_h = options.order == Order::Second && options.hessians == HessianMode::Analytic;
        let cache = with_threads(options.threads, || NodalCache::compute(p, &p.minor_selection(), tess.nodes(), need_h))??;
        let complex = analyze_with_cache(p, &tess, &cache, &options)?;
        let first = with_threads(options.threads, || stats(p, 1, &tess, &complex, reference.as_ref()))??;
        Ok(RefinementState { iteration: 1, tess, cache, complex, history: vec![first], options, reference })
    }

    pub fn last(&self) -> &IterationStats {
        self.history.last().expect("history starts with the initial analysis")
    }
}

fn target_lines(c: &ParetoComplex) -> Vec<crate::continuation::Polyline> {
    c.polylines(target_strata(c))
}

/// Points at arclengths `(2i - 1) L / (2k)`, `i = 1..k`, along every polyline of
/// `k` segments and length `L` in the target strata.
pub fn resample_polyline(c: &ParetoComplex) -> Result<Vec<Candidate>, RefinementError> {
    let lines = target_lines(c);
    if lines.is_empty() {
        return Err(RefinementError::EmptyComplex);
    }
    let strata = target_strata(c);
    let seg_index: std::collections::HashMap<(usize, usize), usize> = c
        .simplices_in(strata)
        .into_iter()
        .filter(|&i| c.simplices[i].vertices.len() == 2)
        .map(|i| {
            let v = &c.simplices[i].vertices;
            ((v[0].min(v[1]), v[0].max(v[1])), i)
        })
        .collect();
    let mut out = Vec::new();
    for line in lines {
        let mut ids = line.vertices.clone();
        if line.closed {
            ids.push(ids[0]);
        }
        let segs: Vec<(usize, usize)> = ids.windows(2).map(|w| (w[0], w[1])).collect();
        let lens: Vec<f64> =
            segs.iter().map(|&(a, b)| crate::continuation::dist_points(&c.vertices[a].x, &c.vertices[b].x)).collect();
        let total: f64 = lens.iter().sum();
        let k = segs.len();
        if k == 0 || total == 0.0 {
            continue;
        }
        let (mut seg, mut start) = (0usize, 0.0f64);
        for i in 1..=k {
            let s = (2 * i - 1) as f64 * total / (2 * k) as f64;
            while seg + 1 < k && start + lens[seg] < s {
                start += lens[seg];
                seg += 1;
            }
            let (a, b) = segs[seg];
            let t = if lens[seg] > 0.0 { ((s - start) / lens[seg]).clamp(0.0, 1.0) } else { 0.0 };
            let (xa, xb) = (&c.vertices[a].x, &c.vertices[b].x);
            let x = xa.iter().zip(xb).map(|(p, q)| p + t * (q - p)).collect();
            out.push(Candidate { x, simplex: seg_index[&(a.min(b), a.max(b))] });
        }
    }
    Ok(out)
}

fn simplex_measure(pts: &[&[f64]]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 0.0;
    }
    let e = nalgebra::DMatrix::from_fn(pts[0].len(), k, |i, j| pts[j + 1][i] - pts[0][i]);
    let g = e.transpose() * e;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    g.determinant().max(0.0).sqrt() / fact
}

/// Greedy uniform filling: repeatedly take the centroid of the simplex with the
/// largest accumulated measure (its own plus its unpicked neighbours' across
/// shared facets), excluding picked simplices from further sums.
pub fn maximin_fill(c: &ParetoComplex, count: usize) -> Result<Vec<Candidate>, RefinementError> {
    let chosen = c.simplices_in(target_strata(c));
    if chosen.is_empty() {
        return Err(RefinementError::EmptyComplex);
    }
    let vol: Vec<f64> = chosen
        .iter()
        .map(|&i| {
            let pts: Vec<&[f64]> = c.simplices[i].vertices.iter().map(|&v| c.vertices[v].x.as_slice()).collect();
            simplex_measure(&pts)
        })
        .collect();
    let mut facets: std::collections::HashMap<Vec<usize>, Vec<usize>> = std::collections::HashMap::new();
    for (local, &i) in chosen.iter().enumerate() {
        let mut vs = c.simplices[i].vertices.clone();
        vs.sort_unstable();
        for skip in 0..vs.len() {
            let facet: Vec<usize> = vs.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
            facets.entry(facet).or_default().push(local);
        }
    }
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); chosen.len()];
    for group in facets.values() {
        for &a in group {
            for &b in group {
                if a != b && !nbrs[a].contains(&b) {
                    nbrs[a].push(b);
                }
            }
        }
    }
    let mut acc: Vec<f64> = (0..chosen.len()).map(|i| vol[i] + nbrs[i].iter().map(|&j| vol[j]).sum::<f64>()).collect();
    let mut picked = vec![false; chosen.len()];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.min(chosen.len()) {
        let best = (0..chosen.len())
            .filter(|&i| !picked[i])
            .max_by(|&a, &b| acc[a].total_cmp(&acc[b]).then(b.cmp(&a)))
            .expect("fewer picks than simplices");
        picked[best] = true;
        acc[best] = 0.0;
        for &j in &nbrs[best] {
            acc[j] -= vol[best];
        }
        let s = &c.simplices[chosen[best]];
        let dim = c.ambient_dim;
        let x = (0..dim).map(|d| s.vertices.iter().map(|&v| c.vertices[v].x[d]).sum::<f64>() / s.vertices.len() as f64);
        out.push(Candidate { x: x.collect(), simplex: chosen[best] });
    }
    Ok(out)
}

fn host_edge(tess: &Tessellation, cell: usize) -> f64 {
    let pts = tess.cell_points(cell);
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min(crate::continuation::dist_points(pts[i], pts[j]));
        }
    }
    best
}

/// Keeps the `budget` candidates whose host simplices carry the largest minors.
fn rank_by_minor(p: &dyn VectorProblem, c: &ParetoComplex, cands: Vec<Candidate>) -> Vec<Candidate> {
    let score: Vec<f64> = cands
        .par_iter()
        .map(|cand| {
            c.simplices[cand.simplex].vertices.iter().map(|&v| minor_magnitude(p, &c.vertices[v].x)).fold(0.0, f64::max)
        })
        .collect();
    let mut ranked: Vec<(f64, Candidate)> = score.into_iter().zip(cands).collect();
    // Stable sort keeps generation order among equal scores.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    ranked.into_iter().map(|(_, cand)| cand).collect()
}

/// Candidates accepted by the spacing guard, in order.
pub fn spacing_filter(tess: &Tessellation, c: &ParetoComplex, cands: Vec<Candidate>) -> Vec<Candidate> {
    guarded(tess, c, cands, None)
}

/// Spacing guard that stops after `limit` acceptances.
fn guarded(tess: &Tessellation, c: &ParetoComplex, cands: Vec<Candidate>, limit: Option<usize>) -> Vec<Candidate> {
    let nodes = tess.nodes();
    let mut accepted: Vec<Candidate> = Vec::new();
    for cand in cands {
        if limit.is_some_and(|l| accepted.len() >= l) {
            break;
        }
        let cell = c.simplices[cand.simplex].source_cell;
        let gamma = SPACING_GAMMA * host_edge(tess, cell);
        let near_node = (0..nodes.len())
            .into_par_iter()
            .any(|i| crate::continuation::dist_points(nodes.point(i), &cand.x) < gamma);
        let near_new = accepted.iter().any(|a| crate::continuation::dist_points(&a.x, &cand.x) < gamma);
        if !near_node && !near_new {
            accepted.push(cand);
        }
    }
    accepted
}

/// One refinement step: candidates, spacing guard, insertion, re-analysis.
pub fn iterate(
    p: &dyn VectorProblem,
    state: RefinementState,
    scheme: Scheme,
    budget: Option<usize>,
) -> Result<RefinementState, RefinementError> {
    let threads = state.options.threads;
    with_threads(threads, move || step(p, state, scheme, budget))?
}

fn step(
    p: &dyn VectorProblem,
    mut state: RefinementState,
    scheme: Scheme,
    budget: Option<usize>,
) -> Result<RefinementState, RefinementError> {
    let c = &state.complex;
    let mut cands = match scheme {
        Scheme::Polyline => resample_polyline(c)?,
        Scheme::Maximin => maximin_fill(c, c.simplices.len())?,
    };
    if budget.is_some() {
        cands = rank_by_minor(p, c, cands);
    }
    let accepted = guarded(&state.tess, c, cands, budget);
    if accepted.is_empty() {
        return Err(RefinementError::NoProgress);
    }
    let points: Vec<&[f64]> = accepted.iter().map(|a| a.x.as_slice()).collect();
    state.tess.insert_nodes(&points)?;
    state.cache.extend(p, &p.minor_selection(), state.tess.nodes())?;
    state.complex = analyze_with_cache(p, &state.tess, &state.cache, &AnalysisOptions { threads: None, ..state.options })?;
    state.iteration += 1;
    let s = stats(p, state.iteration, &state.tess, &state.complex, state.reference.as_ref())?;
    state.history.push(s);
    Ok(state)
}

/// True once the largest minor magnitude on the refined set is below `tau`.
pub fn should_stop(state: &RefinementState, tau: f64) -> bool {
    state.last().max_minor < tau
}

/// History as CSV, one row per iteration.
pub fn history_csv(history: &[IterationStats]) -> String {
    let mut out = String::from("iteration,nodes,max_minor,mean_minor,hausdorff_to_ref\n");
    for h in history {
        let href = h.hausdorff_to_ref.map(|d| format!("{d:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{:.16e},{:.16e},{}", h.iteration, h.nodes, h.max_minor, h.mean_minor, href);
    }
    out
}

#[cfg(test)]
mod tests;
