//! Axis-aligned bounding-volume hierarchy over simplices for nearest-distance queries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::distance::point_simplex_sq;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Leaf: range into `order`; inner: child indices.
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Leaf(usize, usize),
    Inner(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Bvh {
    simplices: Vec<Vec<Vec<f64>>>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

struct Entry(f64, usize);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // min-heap on distance
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

fn box_sq(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    p.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&a, &b))| {
            let d = if x < a { a - x } else if x > b { x - b } else { 0.0 };
            d * d
        })
        .sum()
}

impl Bvh {
    pub fn new(simplices: Vec<Vec<Vec<f64>>>) -> Self {
        let dim = simplices.first().and_then(|s| s.first()).map_or(0, Vec::len);
        let centroids: Vec<Vec<f64>> = simplices
            .iter()
            .map(|s| (0..dim).map(|d| s.iter().map(|p| p[d]).sum::<f64>() / s.len() as f64).collect())
            .collect();
        let mut bvh = Bvh { order: (0..simplices.len()).collect(), simplices, nodes: Vec::new() };
        if !bvh.simplices.is_empty() {
            bvh.build(0, bvh.order.len(), &centroids, dim);
        }
        bvh
    }

    fn bounds(&self, start: usize, end: usize, dim: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for p in &self.simplices[i] {
                for d in 0..dim {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
        }
        (lo, hi)
    }

    fn build(&mut self, start: usize, end: usize, centroids: &[Vec<f64>], dim: usize) -> usize {
        let (lo, hi) = self.bounds(start, end, dim);
        let id = self.nodes.len();
        self.nodes.push(Node { lo: lo.clone(), hi: hi.clone(), kind: Kind::Leaf(start, end) });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (0..dim).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]));
        let left = self.build(start, mid, centroids, dim);
        let right = self.build(mid, end, centroids, dim);
        self.nodes[id].kind = Kind::Inner(left, right);
        id
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Distance from `p` to the nearest simplex, by best-first traversal.
    pub fn nearest(&self, p: &[f64]) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut heap = BinaryHeap::new();
        heap.push(Entry(box_sq(p, &self.nodes[0].lo, &self.nodes[0].hi), 0));
        while let Some(Entry(d, id)) = heap.pop() {
            if d >= best {
                break;
            }
            match self.nodes[id].kind {
                Kind::Leaf(s, e) => {
                    for &i in &self.order[s..e] {
                        let verts: Vec<&[f64]> = self.simplices[i].iter().map(Vec::as_slice).collect();
                        best = best.min(point_simplex_sq(p, &verts));
                    }
                }
                Kind::Inner(l, r) => {
                    for c in [l, r] {
                        let dc = box_sq(p, &self.nodes[c].lo, &self.nodes[c].hi);
                        if dc < best {
                            heap.push(Entry(dc, c));
                        }
                    }
                }
            }
        }
        best.sqrt()
    }
}
