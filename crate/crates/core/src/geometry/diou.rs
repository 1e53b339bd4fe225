use super::{center_points, polygon_iou, Polygon};
use crate::error::{Error, Result};

/// Below this boundary spread the center penalty is taken as 0.
pub const DIOU_EPS: f64 = 1e-9;

/// Distance-IoU of two paired-boundary polygons with the same `K`.
///
/// `IoU − mean_k |c_a(k) − c_b(k)| / max_{m,n} |a_m − b_n|`, where `c` are
/// center points and the max runs over every (a, b) boundary point pair.
pub fn polygon_diou(a: &Polygon, b: &Polygon) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::PointCountMismatch(a.len(), b.len()));
    }
    let ca = center_points(a)?;
    let cb = center_points(b)?;
    let k = ca.centers.len() as f64;
    let mean_center = ca
        .centers
        .iter()
        .zip(&cb.centers)
        .map(|(p, q)| p.distance(*q))
        .sum::<f64>()
        / k;
    let spread = a
        .points()
        .iter()
        .flat_map(|p| b.points().iter().map(move |q| p.distance(*q)))
        .fold(0.0_f64, f64::max);
    let penalty = if spread < DIOU_EPS {
        0.0
    } else {
        (mean_center / spread).min(1.0)
    };
    Ok(polygon_iou(a, b) - penalty)
}
