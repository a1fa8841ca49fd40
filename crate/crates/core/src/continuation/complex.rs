//! The glued, labeled complex and its connectivity queries.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::CellAnalysis;
use super::{MarkerKind, Stratum, VertexKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVertex {
    pub key: VertexKey,
    pub x: Vec<f64>,
    /// Objective values at `x`.
    pub u: Vec<f64>,
    pub lambda: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    /// Lowest cell that produced this vertex.
    pub source_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexSimplex {
    pub vertices: Vec<usize>,
    pub stratum: Stratum,
    pub source_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub x: Vec<f64>,
    pub kind: MarkerKind,
    pub vertex: Option<usize>,
}

/// Counters collected while analyzing the cells.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub cells: usize,
    pub cells_with_singular_set: usize,
    pub skipped_faces: usize,
    pub rank_collapse: usize,
    pub non_critical: usize,
    pub kernel_mismatch: usize,
    pub transversality_warnings: usize,
    pub degenerate_cells: usize,
}

/// A maximal chain of segments; closed chains repeat no vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyline {
    pub vertices: Vec<usize>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoComplex {
    pub ambient_dim: usize,
    pub objectives: usize,
    pub vertices: Vec<ComplexVertex>,
    pub simplices: Vec<ComplexSimplex>,
    pub markers: Vec<Marker>,
    pub diagnostics: Diagnostics,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Merges per-cell analyses into one complex.
///
/// Vertices are identified by key, so a vertex found from a shared face is
/// stored once; its data comes from the lowest cell. Global ids follow key
/// order, polygons are fan-triangulated from their lowest global id, and
/// simplices and markers are deduplicated.
pub fn glue(
    analyses: &[CellAnalysis],
    ambient_dim: usize,
    objectives: usize,
    eval: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
) -> ParetoComplex {
    let mut order: Vec<&CellAnalysis> = analyses.iter().collect();
    order.sort_by_key(|a| a.cell);

    let mut diagnostics = Diagnostics { cells: analyses.len(), ..Diagnostics::default() };
    let mut keys: BTreeMap<&VertexKey, (usize, usize)> = BTreeMap::new();
    for a in &order {
        if !a.sigma_polytope.is_empty() {
            diagnostics.cells_with_singular_set += 1;
        }
        diagnostics.skipped_faces += a.skipped_faces;
        diagnostics.transversality_warnings += a.transversality_warning as usize;
        diagnostics.degenerate_cells += a.degenerate as usize;
        for v in &a.singular_vertices {
            diagnostics.rank_collapse += v.flags.rank_collapse as usize;
            diagnostics.non_critical += v.flags.non_critical as usize;
            diagnostics.kernel_mismatch += v.flags.kernel_mismatch as usize;
        }
        let used = a.pieces.iter().flat_map(|p| p.vertices.iter()).chain(a.markers.iter().map(|(v, _)| v));
        for &v in used {
            keys.entry(&a.vertices[v].key).or_insert((a.cell, v));
        }
    }

    let cell_pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, a)| (a.cell, i)).collect();
    let id_of: HashMap<&VertexKey, usize> = keys.keys().enumerate().map(|(i, k)| (*k, i)).collect();
    let vertices: Vec<ComplexVertex> = keys
        .par_iter()
        .map(|(key, &(cell, local))| {
            let v = &order[cell_pos[&cell]].vertices[local];
            ComplexVertex {
                key: (*key).clone(),
                u: eval(&v.x),
                x: v.x.clone(),
                lambda: v.lambda.clone(),
                sigma: v.sigma.clone(),
                source_cell: cell,
            }
        })
        .collect();

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut simplices = Vec::new();
    let mut marker_seen: BTreeSet<(usize, MarkerKind)> = BTreeSet::new();
    let mut markers = Vec::new();
    for a in &order {
        for piece in &a.pieces {
            let ids: Vec<usize> = piece.vertices.iter().map(|&v| id_of[&a.vertices[v].key]).collect();
            for tri in fan(&ids) {
                let mut set = tri.clone();
                set.sort_unstable();
                if seen.insert(set) {
                    simplices.push(ComplexSimplex { vertices: tri, stratum: piece.stratum, source_cell: a.cell });
                }
            }
        }
        for &(v, kind) in &a.markers {
            let id = id_of[&a.vertices[v].key];
            if marker_seen.insert((id, kind)) {
                markers.push(Marker { x: vertices[id].x.clone(), kind, vertex: Some(id) });
            }
        }
    }
    ParetoComplex { ambient_dim, objectives, vertices, simplices, markers, diagnostics }
}

/// Segments pass through; polygons become a fan from their lowest id.
fn fan(ids: &[usize]) -> Vec<Vec<usize>> {
    if ids.len() <= 2 {
        return vec![ids.to_vec()];
    }
    let start = (0..ids.len()).min_by_key(|&i| ids[i]).unwrap();
    let k = ids.len();
    (1..k - 1).map(|j| vec![ids[start], ids[(start + j) % k], ids[(start + j + 1) % k]]).collect()
}

impl ParetoComplex {
    /// Dimension of the simplices, `None` when the complex is empty.
    pub fn simplex_dim(&self) -> Option<usize> {
        self.simplices.first().map(|s| s.vertices.len() - 1)
    }

    pub fn count_stratum(&self, stratum: Stratum) -> usize {
        self.simplices.iter().filter(|s| s.stratum == stratum).count()
    }

    pub fn count_markers(&self, kind: MarkerKind) -> usize {
        self.markers.iter().filter(|m| m.kind == kind).count()
    }

    /// Indices of simplices whose stratum is in `strata`.
    pub fn simplices_in(&self, strata: &[Stratum]) -> Vec<usize> {
        (0..self.simplices.len()).filter(|&i| strata.contains(&self.simplices[i].stratum)).collect()
    }

    /// Distinct vertex ids used by simplices with stratum in `strata`.
    pub fn vertices_in(&self, strata: &[Stratum]) -> Vec<usize> {
        let set: BTreeSet<usize> =
            self.simplices_in(strata).into_iter().flat_map(|i| self.simplices[i].vertices.iter().copied()).collect();
        set.into_iter().collect()
    }

    /// Connected components (sharing a vertex) among simplices with stratum in
    /// `strata`, each a sorted list of simplex indices, ordered by first index.
    pub fn components(&self, strata: &[Stratum]) -> Vec<Vec<usize>> {
        let chosen = self.simplices_in(strata);
        let mut uf = UnionFind::new(self.vertices.len());
        for &i in &chosen {
            let vs = &self.simplices[i].vertices;
            for w in &vs[1..] {
                uf.union(vs[0], *w);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &chosen {
            let root = uf.find(self.simplices[i].vertices[0]);
            groups.entry(root).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|g| g[0]);
        out
    }

    /// Component id of every simplex in `strata` (others get `None`).
    pub fn component_ids(&self, strata: &[Stratum]) -> Vec<Option<usize>> {
        let mut ids = vec![None; self.simplices.len()];
        for (c, group) in self.components(strata).iter().enumerate() {
            for &i in group {
                ids[i] = Some(c);
            }
        }
        ids
    }

    /// Chains of 1-simplices in `strata`, split at vertices of degree other than two.
    ///
    /// Open chains start at their lower-id end vertex in increasing order of
    /// that id; cycles start at their lowest id and head to its lower neighbour.
    pub fn polylines(&self, strata: &[Stratum]) -> Vec<Polyline> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in self.simplices_in(strata) {
            let vs = &self.simplices[i].vertices;
            if vs.len() != 2 || vs[0] == vs[1] {
                continue;
            }
            adj.entry(vs[0]).or_default().push(vs[1]);
            adj.entry(vs[1]).or_default().push(vs[0]);
        }
        for n in adj.values_mut() {
            n.sort_unstable();
            n.dedup();
        }
        let edge = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut out = Vec::new();
        let walk = |start: usize, next: usize, used: &mut BTreeSet<(usize, usize)>| {
            let mut chain = vec![start];
            let (mut prev, mut cur) = (start, next);
            used.insert(edge(prev, cur));
            loop {
                chain.push(cur);
                let nbrs = &adj[&cur];
                if nbrs.len() != 2 {
                    break;
                }
                let nxt = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
                if used.contains(&edge(cur, nxt)) {
                    break;
                }
                used.insert(edge(cur, nxt));
                prev = cur;
                cur = nxt;
            }
            chain
        };
        for (&v, nbrs) in &adj {
            if nbrs.len() == 2 {
                continue;
            }
            for &w in nbrs {
                if !used.contains(&edge(v, w)) {
                    let chain = walk(v, w, &mut used);
                    out.push(Polyline { vertices: chain, closed: false });
                }
            }
        }
        for (&v, nbrs) in &adj {
            if nbrs.len() == 2 && !used.contains(&edge(v, nbrs[0])) {
                let mut chain = walk(v, nbrs[0], &mut used);
                if chain.last() == Some(&v) {
                    chain.pop();
                }
                out.push(Polyline { vertices: chain, closed: true });
            }
        }
        out
    }

    /// Euclidean length of a polyline.
    pub fn polyline_length(&self, line: &Polyline) -> f64 {
        let pts: Vec<&[f64]> = line.vertices.iter().map(|&v| self.vertices[v].x.as_slice()).collect();
        let mut len: f64 = pts.windows(2).map(|w| dist_points(w[0], w[1])).sum();
        if line.closed && pts.len() > 2 {
            len += dist_points(pts[pts.len() - 1], pts[0]);
        }
        len
    }

    /// Vertex coordinates of each simplex in `strata`.
    pub fn simplex_points(&self, strata: &[Stratum]) -> Vec<Vec<Vec<f64>>> {
        self.simplices_in(strata)
            .into_iter()
            .map(|i| self.simplices[i].vertices.iter().map(|&v| self.vertices[v].x.clone()).collect())
            .collect()
    }
}

/// Euclidean distance.
pub fn dist_points(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
