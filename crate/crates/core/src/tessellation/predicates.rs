//! Orientation and insphere predicates.
//!
//! Each predicate first evaluates its determinant in `f64` together with the
//! permanent of the absolute entries, which bounds the rounding error. When the
//! floating-point value is too close to zero to trust its sign, the same
//! determinant is recomputed exactly over big integers. The signs returned are
//! therefore exact for the `f64` coordinates that are passed in.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, Zero};

const UNIT_ROUNDOFF: f64 = f64::EPSILON * 0.5;

/// Largest determinant order handled on the stack (insphere in `R^7`).
pub const MAX_ORDER: usize = 8;

/// Sign of `det(p_1 - p_0, ..., p_n - p_0)` for `n + 1` points in `R^n`.
pub fn orient(points: &[&[f64]]) -> Ordering {
    let d = points.len() - 1;
    debug_assert!(points.iter().all(|p| p.len() == d));
    assert!(d <= MAX_ORDER, "dimension {d} exceeds the supported maximum");
    let mut m = [0.0; MAX_ORDER * MAX_ORDER];
    for (i, p) in points[1..].iter().enumerate() {
        for k in 0..d {
            m[i * d + k] = p[k] - points[0][k];
        }
    }
    if let Some(s) = filtered_sign(&m[..d * d], d, 4.0 * d as f64 + 4.0) {
        return s;
    }
    exact_orient(points)
}

/// Raw sign of the lifted determinant with rows `(p_i - q, |p_i - q|^2)`.
///
/// The sign that means "inside" depends on the dimension and the orientation of
/// the simplex; callers calibrate it with [`inside_sign`].
pub fn insphere_raw(points: &[&[f64]], q: &[f64]) -> Ordering {
    let n = q.len();
    let d = n + 1;
    debug_assert_eq!(points.len(), d);
    assert!(d <= MAX_ORDER, "dimension {n} exceeds the supported maximum");
    let mut m = [0.0; MAX_ORDER * MAX_ORDER];
    for (i, p) in points.iter().enumerate() {
        let mut s = 0.0;
        for k in 0..n {
            let t = p[k] - q[k];
            s += t * t;
            m[i * d + k] = t;
        }
        m[i * d + n] = s;
    }
    if let Some(s) = filtered_sign(&m[..d * d], d, 8.0 * d as f64 + 8.0) {
        return s;
    }
    exact_insphere(points, q)
}

/// Raw insphere sign that corresponds to a point strictly inside the
/// circumsphere of a positively oriented simplex in dimension `n`.
pub fn inside_sign(n: usize) -> Ordering {
    let mut pts = vec![vec![0.0; n]];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        pts.push(e);
    }
    let c = vec![1.0 / (n as f64 + 1.0); n];
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    debug_assert_eq!(orient(&refs), Ordering::Greater);
    insphere_raw(&refs, &c)
}

/// Determinant and permanent of a small row-major matrix via subset expansion.
fn det_and_permanent(m: &[f64], d: usize) -> (f64, f64) {
    let size = 1usize << d;
    let mut det = [0.0; 1 << MAX_ORDER];
    let mut per = [0.0; 1 << MAX_ORDER];
    det[0] = 1.0;
    per[0] = 1.0;
    for mask in 0..size {
        let r = mask.count_ones() as usize;
        if r >= d || (det[mask] == 0.0 && per[mask] == 0.0) {
            continue;
        }
        for c in 0..d {
            let bit = 1usize << c;
            if mask & bit != 0 {
                continue;
            }
            let above = (mask >> (c + 1)).count_ones();
            let a = m[r * d + c];
            let sign = if above % 2 == 0 { 1.0 } else { -1.0 };
            det[mask | bit] += sign * a * det[mask];
            per[mask | bit] += a.abs() * per[mask];
        }
    }
    (det[size - 1], per[size - 1])
}

fn filtered_sign(m: &[f64], d: usize, factor: f64) -> Option<Ordering> {
    let (det, per) = det_and_permanent(m, d);
    if !det.is_finite() || !per.is_finite() {
        return None;
    }
    let bound = factor * UNIT_ROUNDOFF * per + f64::MIN_POSITIVE;
    if det > bound {
        Some(Ordering::Greater)
    } else if det < -bound {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// Converts a set of floats into big integers sharing one binary exponent.
fn to_common_scale(values: &[f64]) -> Vec<BigInt> {
    let decoded: Vec<(u64, i16, i8)> = values.iter().map(|v| Float::integer_decode(*v)).collect();
    let emin = decoded
        .iter()
        .filter(|(mant, _, _)| *mant != 0)
        .map(|(_, e, _)| *e)
        .min()
        .unwrap_or(0);
    decoded
        .iter()
        .map(|&(mant, e, s)| {
            if mant == 0 {
                return BigInt::zero();
            }
            let v = BigInt::from(mant) << ((e - emin) as usize);
            if s < 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

fn exact_orient(points: &[&[f64]]) -> Ordering {
    let d = points.len() - 1;
    let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    let big = to_common_scale(&flat);
    let mut m = Vec::with_capacity(d * d);
    for i in 1..=d {
        for k in 0..d {
            m.push(&big[i * d + k] - &big[k]);
        }
    }
    bareiss_sign(m, d)
}

fn exact_insphere(points: &[&[f64]], q: &[f64]) -> Ordering {
    let n = q.len();
    let d = n + 1;
    let mut flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    flat.extend_from_slice(q);
    let big = to_common_scale(&flat);
    let qb = &big[d * n..];
    let mut m = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut s = BigInt::zero();
        for k in 0..n {
            let t = &big[i * n + k] - &qb[k];
            s += &t * &t;
            m.push(t);
        }
        m.push(s);
    }
    bareiss_sign(m, d)
}

/// Exact determinant sign by fraction-free Gaussian elimination.
fn bareiss_sign(mut a: Vec<BigInt>, d: usize) -> Ordering {
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..d {
        if a[k * d + k].is_zero() {
            let Some(p) = (k + 1..d).find(|&i| !a[i * d + k].is_zero()) else {
                return Ordering::Equal;
            };
            for j in 0..d {
                a.swap(k * d + j, p * d + j);
            }
            negate = !negate;
        }
        if k + 1 == d {
            break;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let v = &a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j];
                a[i * d + j] = v / &prev;
            }
        }
        prev = a[k * d + k].clone();
    }
    let last = &a[d * d - 1];
    let s = if last.is_positive() {
        Ordering::Greater
    } else if last.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    };
    if negate {
        s.reverse()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orient_basic() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        assert_eq!(orient(&[&a, &b, &c]), Ordering::Greater);
        assert_eq!(orient(&[&a, &c, &b]), Ordering::Less);
        let d = [2.0, 0.0];
        assert_eq!(orient(&[&a, &b, &d]), Ordering::Equal);
    }

    #[test]
    fn orient_nearly_collinear_is_exact() {
        let a = [0.1, 0.1];
        let b = [0.3, 0.3];
        let c = [0.5, 0.5 + 1e-17];
        // 0.5 + 1e-17 rounds to 0.5, and the three floats are exactly collinear
        // only if 0.1, 0.3, 0.5 are; they are not, so the sign must match the
        // exact rational computation.
        let exact = exact_orient(&[&a, &b, &c]);
        assert_eq!(orient(&[&a, &b, &c]), exact);
    }

    #[test]
    fn insphere_calibration() {
        for n in 1..=6 {
            let s = inside_sign(n);
            assert_ne!(s, Ordering::Equal);
        }
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        let inside = inside_sign(2);
        assert_eq!(insphere_raw(&[&a, &b, &c], &[0.5, 0.5 - 1e-3]), inside);
        assert_eq!(insphere_raw(&[&a, &b, &c], &[2.0, 2.0]), inside.reverse());
        // cocircular fourth point
        assert_eq!(insphere_raw(&[&a, &b, &c], &[1.0, 1.0]), Ordering::Equal);
    }

    #[test]
    fn bareiss_matches_float() {
        let m = [2.0, -1.0, 0.5, 3.0, 4.0, 1.0, -2.0, 0.25, 5.0];
        let (det, _) = det_and_permanent(&m, 3);
        let big = to_common_scale(&m);
        assert_eq!(bareiss_sign(big, 3), det.partial_cmp(&0.0).unwrap());
    }
}
