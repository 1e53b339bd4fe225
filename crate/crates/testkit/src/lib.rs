//! Reference implementations used only to check the engine.
//!
//! Nothing here calls into the engine's geometry, text or matching code; the
//! engine crate is only used for its plain data types.

use rand::Rng;
use spotmatch::geometry::{Point, Polygon};

/// IoU by counting pixel centers on a `res × res` grid spanning the joint
/// bounding box. Each row is scanned exactly with its edge crossings.
pub fn raster_iou(a: &Polygon, b: &Polygon, res: usize) -> f64 {
    let all = a.points().iter().chain(b.points());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in all {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let (hx, hy) = ((x1 - x0) / res as f64, (y1 - y0) / res as f64);
    if hx <= 0.0 || hy <= 0.0 {
        return 0.0;
    }
    let (mut na, mut nb, mut ni) = (0usize, 0usize, 0usize);
    for row in 0..res {
        let y = y0 + (row as f64 + 0.5) * hy;
        let ia = row_intervals(a.points(), y);
        let ib = row_intervals(b.points(), y);
        let count = |l: f64, r: f64| -> usize {
            let lo = ((l - x0) / hx - 0.5).ceil().clamp(0.0, res as f64);
            let hi = ((r - x0) / hx - 0.5).ceil().clamp(0.0, res as f64);
            (hi - lo).max(0.0) as usize
        };
        na += ia.iter().map(|&(l, r)| count(l, r)).sum::<usize>();
        nb += ib.iter().map(|&(l, r)| count(l, r)).sum::<usize>();
        let (mut i, mut j) = (0, 0);
        while i < ia.len() && j < ib.len() {
            let l = ia[i].0.max(ib[j].0);
            let r = ia[i].1.min(ib[j].1);
            if l < r {
                ni += count(l, r);
            }
            if ia[i].1 < ib[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    let union = na + nb - ni;
    if union == 0 {
        0.0
    } else {
        ni as f64 / union as f64
    }
}

/// Even-odd interior intervals of a ring along the horizontal line `y`.
fn row_intervals(ring: &[Point], y: f64) -> Vec<(f64, f64)> {
    let n = ring.len();
    let mut xs = Vec::new();
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        if (p.y > y) != (q.y > y) {
            xs.push(p.x + (y - p.y) / (q.y - p.y) * (q.x - p.x));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Shoelace area, written out independently.
pub fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        s += points[i].x * points[j].y - points[j].x * points[i].y;
    }
    (s / 2.0).abs()
}

/// Minimum total over every injective assignment of the smaller side,
/// summing chosen entries in row order.
pub fn brute_force_min_cost(costs: &[Vec<f64>]) -> f64 {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; cols.max(rows)];
    if rows <= cols {
        let mut chosen = vec![0usize; rows];
        rows_first(costs, 0, &mut used, &mut chosen, &mut best);
    } else {
        // choose which row takes each column, then sum by row order
        let mut owner = vec![usize::MAX; rows];
        cols_first(costs, 0, cols, &mut used, &mut owner, &mut best);
    }
    best
}

fn rows_first(c: &[Vec<f64>], row: usize, used: &mut [bool], chosen: &mut [usize], best: &mut f64) {
    if row == c.len() {
        let total: f64 = chosen.iter().enumerate().map(|(i, &j)| c[i][j]).sum();
        if total < *best {
            *best = total;
        }
        return;
    }
    for j in 0..c[0].len() {
        if !used[j] {
            used[j] = true;
            chosen[row] = j;
            rows_first(c, row + 1, used, chosen, best);
            used[j] = false;
        }
    }
}

fn cols_first(c: &[Vec<f64>], col: usize, cols: usize, used: &mut [bool], owner: &mut [usize], best: &mut f64) {
    if col == cols {
        let total: f64 = owner
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != usize::MAX)
            .map(|(i, &j)| c[i][j])
            .sum();
        if total < *best {
            *best = total;
        }
        return;
    }
    for i in 0..c.len() {
        if !used[i] {
            used[i] = true;
            owner[i] = col;
            cols_first(c, col + 1, cols, used, owner, best);
            owner[i] = usize::MAX;
            used[i] = false;
        }
    }
}

/// Full `(|a|+1) × (|b|+1)` edit-distance table.
pub fn dp_levenshtein(a: &[char], b: &[char]) -> usize {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let del = table[i - 1][j] + 1;
            let ins = table[i][j - 1] + 1;
            table[i][j] = sub.min(del).min(ins);
        }
    }
    table[a.len()][b.len()]
}

/// Largest number of disjoint `(pred, gt)` pairs over `admissible`.
pub fn max_matching_count(admissible: &[Vec<bool>]) -> usize {
    fn go(adm: &[Vec<bool>], row: usize, used: &mut Vec<bool>) -> usize {
        if row == adm.len() {
            return 0;
        }
        let mut best = go(adm, row + 1, used);
        for j in 0..used.len() {
            if adm[row][j] && !used[j] {
                used[j] = true;
                best = best.max(1 + go(adm, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    let cols = admissible.first().map_or(0, Vec::len);
    go(admissible, 0, &mut vec![false; cols])
}

/// Star-shaped (hence simple, generally non-convex) polygon with `n` vertices
/// around `center`, radii in `[r_min, r_max]`.
pub fn random_star_polygon(rng: &mut impl Rng, n: usize, center: Point, r_min: f64, r_max: f64) -> Polygon {
    let mut angles: Vec<f64> = (0..n)
        .map(|i| {
            let slot = std::f64::consts::TAU / n as f64;
            (i as f64 + rng.random_range(0.1..0.9)) * slot
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let pts = angles
        .into_iter()
        .map(|a| {
            let r = rng.random_range(r_min..r_max);
            Point::new(center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect();
    Polygon::new(pts).unwrap()
}

/// Curved paired-boundary text polygon with `k` points per side.
pub fn random_text_polygon(rng: &mut impl Rng, k: usize) -> Polygon {
    let w = rng.random_range(0.1..0.5);
    let h = rng.random_range(0.03..0.15);
    let x0 = rng.random_range(0.0..(1.0 - w));
    let y0 = rng.random_range(0.1..(0.9 - h - 0.05));
    let bend = rng.random_range(-0.5..0.5) * h;
    let top: Vec<Point> = (0..k)
        .map(|i| {
            let u = i as f64 / (k - 1) as f64;
            let v = 2.0 * u - 1.0;
            Point::new(x0 + u * w, y0 + bend * v * v + rng.random_range(-0.1..0.1) * h)
        })
        .collect();
    let mut pts = top.clone();
    pts.extend(top.iter().rev().map(|p| Point::new(p.x, p.y + h)));
    Polygon::new(pts).unwrap()
}

/// A random pair drawn from a mix of star and text shapes, often overlapping.
pub fn random_polygon_pair(rng: &mut impl Rng) -> (Polygon, Polygon) {
    if rng.random_bool(0.5) {
        let n = 2 * rng.random_range(3..10);
        let c = Point::new(rng.random_range(0.3..0.7), rng.random_range(0.3..0.7));
        let a = random_star_polygon(rng, n, c, 0.05, 0.3);
        let c2 = Point::new(c.x + rng.random_range(-0.2..0.2), c.y + rng.random_range(-0.2..0.2));
        let b = random_star_polygon(rng, n, c2, 0.05, 0.3);
        (a, b)
    } else {
        let k = rng.random_range(3..9);
        let a = random_text_polygon(rng, k);
        let shift = (rng.random_range(-0.1..0.1), rng.random_range(-0.05..0.05));
        let b: Vec<Point> = a
            .points()
            .iter()
            .map(|p| {
                Point::new(
                    p.x + shift.0 + rng.random_range(-0.004..0.004),
                    p.y + shift.1 + rng.random_range(-0.005..0.005),
                )
            })
            .collect();
        (a, Polygon::new(b).unwrap())
    }
}

/// Row-major random matrix with entries in `[0, scale)`, optionally integral.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64, integral: bool) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let v = rng.random_range(0.0..scale);
                    if integral {
                        v.floor()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}
