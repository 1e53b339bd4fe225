//! Intersection area of two simple polygons.
//!
//! The boundary of `A ∩ B` is made of the pieces of A's boundary that lie
//! inside B plus the pieces of B's boundary that lie inside A. Every edge is
//! split at all crossings with the other ring, each piece is classified by
//! its midpoint, and the kept pieces are integrated with Green's theorem.
//! Pieces lying on a shared edge count once when both rings run the same way
//! and not at all when they run opposite ways.

use super::{Point, Polygon};

const PARAM_EPS: f64 = 1e-12;
const ON_EDGE_EPS: f64 = 1e-12;

pub fn intersection_area(a: &Polygon, b: &Polygon) -> f64 {
    let a = a.ccw_points();
    let b = b.ccw_points();
    let twice = inside_boundary_integral(&a, &b, true) + inside_boundary_integral(&b, &a, false);
    (twice * 0.5).max(0.0)
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Inside,
    Outside,
    SharedSame,
    SharedOpposite,
}

/// Σ cross(p0, p1) over the pieces of `ring`'s boundary inside `other`.
fn inside_boundary_integral(ring: &[Point], other: &[Point], keep_shared: bool) -> f64 {
    let n = ring.len();
    let m = other.len();
    let mut sum = 0.0;
    let mut params: Vec<f64> = Vec::with_capacity(8);
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let dir = q.sub(p);
        let len2 = dir.dot(dir);
        if len2 == 0.0 {
            continue;
        }
        params.clear();
        params.push(0.0);
        params.push(1.0);
        for j in 0..m {
            let r = other[j];
            let s = other[(j + 1) % m];
            edge_crossings(p, dir, len2, r, s, &mut params);
        }
        params.sort_by(f64::total_cmp);
        params.dedup_by(|x, y| (*x - *y).abs() <= PARAM_EPS);

        for w in params.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= PARAM_EPS {
                continue;
            }
            let mid = p.lerp(q, 0.5 * (t0 + t1));
            let keep = match classify(mid, dir, other) {
                Side::Inside => true,
                Side::SharedSame => keep_shared,
                Side::Outside | Side::SharedOpposite => false,
            };
            if keep {
                let start = if t0 == 0.0 { p } else { p.lerp(q, t0) };
                let end = if t1 == 1.0 { q } else { p.lerp(q, t1) };
                sum += start.cross(end);
            }
        }
    }
    sum
}

/// Pushes the parameters along `p + t·dir` where segment `r→s` meets it.
fn edge_crossings(p: Point, dir: Point, len2: f64, r: Point, s: Point, out: &mut Vec<f64>) {
    let e = s.sub(r);
    let denom = dir.cross(e);
    let rp = r.sub(p);
    let scale = len2.sqrt() * e.dot(e).sqrt();
    if denom.abs() > PARAM_EPS * scale {
        let t = rp.cross(e) / denom;
        let u = rp.cross(dir) / denom;
        if (-PARAM_EPS..=1.0 + PARAM_EPS).contains(&t) && (-PARAM_EPS..=1.0 + PARAM_EPS).contains(&u)
        {
            out.push(t.clamp(0.0, 1.0));
        }
    } else if rp.cross(dir).abs() <= ON_EDGE_EPS * len2.sqrt() {
        // collinear: split at the other segment's endpoints
        for t in [rp.dot(dir) / len2, s.sub(p).dot(dir) / len2] {
            if t > 0.0 && t < 1.0 {
                out.push(t);
            }
        }
    }
}

fn classify(pt: Point, dir: Point, ring: &[Point]) -> Side {
    let m = ring.len();
    for j in 0..m {
        let r = ring[j];
        let s = ring[(j + 1) % m];
        let e = s.sub(r);
        let len2 = e.dot(e);
        if len2 == 0.0 {
            continue;
        }
        let rel = pt.sub(r);
        let t = rel.dot(e) / len2;
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let dist = rel.cross(e).abs() / len2.sqrt();
        if dist <= ON_EDGE_EPS {
            return if dir.dot(e) > 0.0 {
                Side::SharedSame
            } else {
                Side::SharedOpposite
            };
        }
    }
    if contains(ring, pt) {
        Side::Inside
    } else {
        Side::Outside
    }
}

/// Even-odd crossing test.
pub(crate) fn contains(ring: &[Point], pt: Point) -> bool {
    let m = ring.len();
    let mut inside = false;
    let mut j = m - 1;
    for i in 0..m {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > pt.y) != (b.y > pt.y) {
            let x = a.x + (pt.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if pt.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}
