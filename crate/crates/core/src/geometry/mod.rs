//! Planar polygons in normalized image coordinates.
//!
//! Text instances are paired-boundary polygons: the first `K` points trace the
//! top boundary left to right, the last `K` trace the bottom boundary right to
//! left. Area and overlap routines accept any simple ring with at least three
//! vertices; the center-line construction requires the paired layout.

mod clip;
mod diou;

pub use clip::intersection_area;
pub use diou::{polygon_diou, DIOU_EPS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Areas below this are treated as degenerate.
pub const AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// A closed polygon ring. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    points: Vec<Point>,
}

impl Polygon {
    /// Builds a ring from at least three finite points.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::BadPointCount(points.len()));
        }
        if let Some(i) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { points })
    }

    /// Builds a paired-boundary text polygon (even point count, `K >= 3`).
    pub fn text(points: Vec<Point>) -> Result<Self> {
        if points.len() < 6 || !points.len().is_multiple_of(2) {
            return Err(Error::BadPointCount(points.len()));
        }
        Self::new(points)
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().copied().map(Point::from).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polygon {
        Polygon {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    /// Shoelace sum, positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        ring_signed_area(&self.points)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() < AREA_EPS
    }

    /// Checks that no two non-adjacent edges touch or cross.
    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        for i in 0..n {
            let (a0, a1) = (self.points[i], self.points[(i + 1) % n]);
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (b0, b1) = (self.points[j], self.points[(j + 1) % n]);
                if segments_touch(a0, a1, b0, b1) {
                    return Err(Error::SelfIntersecting(i, j));
                }
            }
        }
        Ok(())
    }

    /// Number of center points, `len / 2`. Errors on an odd point count.
    pub fn half_len(&self) -> Result<usize> {
        if !self.points.len().is_multiple_of(2) {
            return Err(Error::BadPointCount(self.points.len()));
        }
        Ok(self.points.len() / 2)
    }

    /// Vertices in counter-clockwise order.
    pub(crate) fn ccw_points(&self) -> Vec<Point> {
        let mut pts = self.points.clone();
        if ring_signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        pts
    }
}

pub(crate) fn ring_signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        sum += points[i].cross(points[(i + 1) % n]);
    }
    sum * 0.5
}

fn segments_touch(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b0, b1, a0))
        || (d2 == 0.0 && on_segment(b0, b1, a1))
        || (d3 == 0.0 && on_segment(a0, a1, b0))
        || (d4 == 0.0 && on_segment(a0, a1, b1))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Shoelace area of a ring, zero for degenerate input.
pub fn polygon_area(poly: &Polygon) -> f64 {
    poly.area()
}

/// Result of an overlap computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub iou: f64,
    pub intersection: f64,
    pub union: f64,
    /// Set when either input has (near) zero area; `iou` is then 0.
    pub degenerate: bool,
}

/// Intersection over union of two simple polygons.
pub fn overlap(a: &Polygon, b: &Polygon) -> Overlap {
    let (area_a, area_b) = (a.area(), b.area());
    if area_a < AREA_EPS || area_b < AREA_EPS {
        return Overlap {
            iou: 0.0,
            intersection: 0.0,
            union: area_a + area_b,
            degenerate: true,
        };
    }
    let inter = intersection_area(a, b).clamp(0.0, area_a.min(area_b));
    let union = area_a + area_b - inter;
    Overlap {
        iou: (inter / union).clamp(0.0, 1.0),
        intersection: inter,
        union,
        degenerate: false,
    }
}

/// IoU in `[0, 1]`; degenerate inputs yield 0.
pub fn polygon_iou(a: &Polygon, b: &Polygon) -> f64 {
    overlap(a, b).iou
}

/// IoU with simplicity validation of both inputs.
pub fn polygon_iou_checked(a: &Polygon, b: &Polygon) -> Result<Overlap> {
    a.validate()?;
    b.validate()?;
    Ok(overlap(a, b))
}

/// Midpoint line of a paired-boundary polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterLine {
    pub centers: Vec<Point>,
}

/// Center `k` is the midpoint of top point `k` and bottom point `2K-1-k`.
pub fn center_points(poly: &Polygon) -> Result<CenterLine> {
    let k = poly.half_len()?;
    let pts = poly.points();
    let centers = (0..k).map(|i| pts[i].midpoint(pts[2 * k - 1 - i])).collect();
    Ok(CenterLine { centers })
}
