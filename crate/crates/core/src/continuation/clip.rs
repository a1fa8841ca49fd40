//! Half-space clipping of segments and planar polygons by a vertex scalar.

/// Outcome of clipping a polytope by `s >= 0`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Clip {
    /// The `s >= 0` part, `None` when it is empty or degenerate.
    pub positive: Option<Vec<usize>>,
    /// The `s <= 0` part, `None` unless some vertex has `s < 0`.
    pub negative: Option<Vec<usize>>,
    /// Vertices on the cut: newly created ones and zero vertices next to a negative one.
    pub boundary: Vec<usize>,
}

/// Clips the polytope `poly` (two ids: a segment, three or more: a polygon in
/// cyclic order) against the scalars `values`, given per entry of `poly`.
///
/// Each edge whose end values have strictly opposite signs is cut by
/// `split(a, b)`, which must return the id of a vertex with value zero on that
/// edge. Vertices with value exactly zero belong to both parts.
pub fn clip_polytope(
    poly: &[usize],
    values: &[f64],
    mut split: impl FnMut(usize, usize) -> usize,
) -> Clip {
    let k = poly.len();
    if k == 0 {
        return Clip::default();
    }
    let min_len = if k <= 2 { 2 } else { 3 };
    let edges = match k {
        1 => 0,
        2 => 1,
        _ => k,
    };
    debug_assert_eq!(values.len(), k);
    let vals = values;
    let mut pos = Vec::with_capacity(k + 2);
    let mut neg = Vec::with_capacity(k + 2);
    let mut boundary = Vec::new();
    let mut any_neg = false;
    for i in 0..k {
        let (v, s) = (poly[i], vals[i]);
        if s >= 0.0 {
            pos.push(v);
        }
        if s <= 0.0 {
            neg.push(v);
        }
        if s < 0.0 {
            any_neg = true;
        } else if s == 0.0 {
            let prev = if k > 2 { Some((i + k - 1) % k) } else { i.checked_sub(1) };
            let next = if k > 2 { Some((i + 1) % k) } else { (i + 1 < k).then_some(i + 1) };
            if prev.into_iter().chain(next).any(|j| vals[j] < 0.0) {
                boundary.push(v);
            }
        }
        if i < edges {
            let j = (i + 1) % k;
            let t = vals[j];
            if (s > 0.0 && t < 0.0) || (s < 0.0 && t > 0.0) {
                let c = split(v, poly[j]);
                pos.push(c);
                neg.push(c);
                boundary.push(c);
            }
        }
    }
    if k == 1 {
        return Clip { positive: None, negative: None, boundary };
    }
    Clip {
        positive: (pos.len() >= min_len).then_some(pos),
        negative: (any_neg && neg.len() >= min_len).then_some(neg),
        boundary,
    }
}
