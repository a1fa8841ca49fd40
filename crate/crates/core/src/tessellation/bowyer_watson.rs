//! Incremental Bowyer–Watson construction over a bounding super-simplex.
//!
//! Internal vertex indices `0..=n` are the super-simplex corners; real node `i`
//! has internal index `i + n + 1`. All stored cells are positively oriented and
//! `nbrs[c * (n + 1) + k]` is the cell across the facet opposite vertex `k`.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::predicates::{insphere_raw, inside_sign, orient, MAX_ORDER};
use super::TessellationError;

const NONE: usize = usize::MAX;

/// Scale of the super-simplex relative to the bounding box diagonal.
const SUPER_SCALE: f64 = 1.0e6;

#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    dim: usize,
    /// Perturbed coordinates used by the predicates, internal index order.
    coords: Vec<f64>,
    verts: Vec<usize>,
    nbrs: Vec<usize>,
    alive: Vec<bool>,
    free: Vec<usize>,
    last: usize,
    inside: Ordering,
    anchor: Vec<f64>,
    radius: f64,
    span: f64,
    stamp: Vec<u32>,
    generation: u32,
}

pub(crate) enum InsertOutcome {
    Inserted,
    Outside,
}

impl Kernel {
    /// Creates an empty kernel whose super-simplex encloses the box `[lo, hi]`.
    pub(crate) fn new(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let diag = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
            .max(1.0e-300);
        let radius = SUPER_SCALE * diag;
        let span = 2.0 * n as f64 * (diag + radius);
        let anchor: Vec<f64> = lo.iter().map(|v| v - radius).collect();
        let mut coords = Vec::with_capacity((n + 1) * n);
        coords.extend_from_slice(&anchor);
        for k in 0..n {
            let mut v = anchor.clone();
            v[k] += span;
            coords.extend_from_slice(&v);
        }
        let mut verts: Vec<usize> = (0..=n).collect();
        {
            let pts: Vec<&[f64]> = (0..=n).map(|i| &coords[i * n..(i + 1) * n]).collect();
            if orient(&pts) == Ordering::Less {
                verts.swap(0, 1);
            }
        }
        Kernel {
            dim: n,
            coords,
            verts,
            nbrs: vec![NONE; n + 1],
            alive: vec![true],
            free: Vec::new(),
            last: 0,
            inside: inside_sign(n),
            anchor,
            radius,
            span,
            stamp: vec![0],
            generation: 0,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    fn cell(&self, c: usize) -> &[usize] {
        let d = self.dim + 1;
        &self.verts[c * d..(c + 1) * d]
    }

    /// True when `q` lies comfortably inside the super-simplex.
    pub(crate) fn encloses(&self, q: &[f64]) -> bool {
        let mut total = 0.0;
        for (x, a) in q.iter().zip(&self.anchor) {
            let t = x - a;
            if t < 0.5 * self.radius {
                return false;
            }
            total += t;
        }
        total <= 0.75 * self.span
    }

    fn orient_replaced(&self, c: usize, k: usize, q: &[f64]) -> Ordering {
        let cell = self.cell(c);
        let mut pts: [&[f64]; MAX_ORDER + 1] = [&[]; MAX_ORDER + 1];
        for (i, &v) in cell.iter().enumerate() {
            pts[i] = if i == k { q } else { self.point(v) };
        }
        orient(&pts[..cell.len()])
    }

    fn in_conflict(&self, c: usize, q: &[f64]) -> bool {
        let cell = self.cell(c);
        let mut pts: [&[f64]; MAX_ORDER + 1] = [&[]; MAX_ORDER + 1];
        for (i, &v) in cell.iter().enumerate() {
            pts[i] = self.point(v);
        }
        insphere_raw(&pts[..cell.len()], q) == self.inside
    }

    fn contains(&self, c: usize, q: &[f64]) -> bool {
        (0..=self.dim).all(|k| self.orient_replaced(c, k, q) != Ordering::Less)
    }

    fn locate(&self, q: &[f64]) -> Option<usize> {
        let d = self.dim + 1;
        let mut c = if self.alive.get(self.last).copied().unwrap_or(false) {
            self.last
        } else {
            self.alive.iter().position(|&a| a)?
        };
        let limit = 4 * self.alive.len() + 64;
        let mut steps = 0usize;
        'walk: loop {
            let offset = steps % d;
            for j in 0..d {
                let k = (j + offset) % d;
                if self.orient_replaced(c, k, q) == Ordering::Less {
                    let nb = self.nbrs[c * d + k];
                    if nb == NONE {
                        break 'walk;
                    }
                    c = nb;
                    steps += 1;
                    if steps > limit {
                        break 'walk;
                    }
                    continue 'walk;
                }
            }
            return Some(c);
        }
        (0..self.alive.len()).find(|&c| self.alive[c] && self.contains(c, q))
    }

    fn alloc(&mut self) -> usize {
        let d = self.dim + 1;
        if let Some(c) = self.free.pop() {
            self.alive[c] = true;
            return c;
        }
        let c = self.alive.len();
        self.alive.push(true);
        self.stamp.push(0);
        self.verts.extend(std::iter::repeat(NONE).take(d));
        self.nbrs.extend(std::iter::repeat(NONE).take(d));
        c
    }

    /// Inserts a point given its original coordinates and its perturbed copy.
    ///
    /// `original_of` maps an internal vertex index to its unperturbed
    /// coordinates for the duplicate test.
    pub(crate) fn insert<'a>(
        &mut self,
        perturbed: &[f64],
        original: &[f64],
        original_of: impl Fn(usize) -> &'a [f64],
        tol: f64,
    ) -> Result<InsertOutcome, TessellationError> {
        let n = self.dim;
        let d = n + 1;
        if !self.encloses(perturbed) {
            return Ok(InsertOutcome::Outside);
        }
        let Some(start) = self.locate(perturbed) else {
            return Ok(InsertOutcome::Outside);
        };

        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        let gen = self.generation;
        let mut cavity = vec![start];
        self.stamp[start] = gen;
        let mut head = 0;
        while head < cavity.len() {
            let c = cavity[head];
            head += 1;
            for k in 0..d {
                let nb = self.nbrs[c * d + k];
                if nb == NONE || self.stamp[nb] == gen {
                    continue;
                }
                if self.in_conflict(nb, perturbed) {
                    self.stamp[nb] = gen;
                    cavity.push(nb);
                }
            }
        }

        for &c in &cavity {
            for &v in self.cell(c) {
                if v > n {
                    let o = original_of(v);
                    let dist2: f64 = o.iter().zip(original).map(|(a, b)| (a - b) * (a - b)).sum();
                    if dist2.sqrt() <= tol {
                        return Err(TessellationError::DuplicateNode { existing: v - n - 1 });
                    }
                }
            }
        }

        let qidx = self.coords.len() / n;
        self.coords.extend_from_slice(perturbed);

        // Boundary facets of the cavity: (old cell, slot, outside neighbour).
        let mut boundary = Vec::new();
        for &c in &cavity {
            for k in 0..d {
                let nb = self.nbrs[c * d + k];
                if nb == NONE || self.stamp[nb] != gen {
                    let mut vs = self.cell(c).to_vec();
                    vs[k] = qidx;
                    boundary.push((c, k, nb, vs));
                }
            }
        }
        for &c in &cavity {
            self.alive[c] = false;
        }

        let mut pending: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        let mut created = Vec::with_capacity(boundary.len());
        for (old, k, nb, vs) in boundary {
            let c = self.alloc();
            self.stamp[c] = 0;
            self.verts[c * d..(c + 1) * d].copy_from_slice(&vs);
            for j in 0..d {
                self.nbrs[c * d + j] = NONE;
            }
            self.nbrs[c * d + k] = nb;
            if nb != NONE {
                if let Some(j) = (0..d).find(|&j| self.nbrs[nb * d + j] == old) {
                    self.nbrs[nb * d + j] = c;
                }
            }
            for j in 0..d {
                if j == k {
                    continue;
                }
                let mut key: Vec<usize> = vs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| v)
                    .collect();
                key.sort_unstable();
                if let Some((other, slot)) = pending.remove(&key) {
                    self.nbrs[c * d + j] = other;
                    self.nbrs[other * d + slot] = c;
                } else {
                    pending.insert(key, (c, j));
                }
            }
            created.push(c);
        }
        debug_assert!(pending.is_empty(), "cavity boundary is not closed");
        // Released only now so that back-pointer repair above never confuses
        // a recycled id with the cavity cell it replaced.
        self.free.extend_from_slice(&cavity);
        self.last = *created.last().unwrap_or(&self.last);
        Ok(InsertOutcome::Inserted)
    }

    /// Cells made only of real nodes, expressed with real node ids.
    pub(crate) fn real_cells(&self) -> Vec<Vec<usize>> {
        let n = self.dim;
        let mut out = Vec::new();
        for c in 0..self.alive.len() {
            if !self.alive[c] {
                continue;
            }
            let cell = self.cell(c);
            if cell.iter().all(|&v| v > n) {
                let mut ids: Vec<usize> = cell.iter().map(|&v| v - n - 1).collect();
                ids.sort_unstable();
                out.push(ids);
            }
        }
        out
    }

    /// Number of internal vertices inserted so far, super corners excluded.
    pub(crate) fn real_count(&self) -> usize {
        self.coords.len() / self.dim - self.dim - 1
    }
}
