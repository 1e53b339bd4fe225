//! Region deviation versus text similarity between teacher and student.

use serde::{Deserialize, Serialize};

use super::synth::{synth_scenes, SynthConfig};
use crate::error::{Error, Result};
use crate::geometry::{polygon_diou, polygon_iou};
use crate::instance::PredictionSet;
use crate::text::text_similarity;

pub const MIN_CORRELATION_PAIRS: usize = 30;
pub const N_BINS: usize = 10;

/// One teacher/student pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub diou: f64,
    pub iou: f64,
    /// `1 − normalized edit distance`.
    pub similarity: f64,
}

impl CorrelationPoint {
    /// `(1 − DIoU) / 2`, in `[0, 1]`.
    pub fn diou_deviation(&self) -> f64 {
        (1.0 - self.diou) * 0.5
    }

    pub fn iou_deviation(&self) -> f64 {
        1.0 - self.iou
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBin {
    pub deviation_lo: f64,
    pub deviation_hi: f64,
    pub mean_deviation: f64,
    pub mean_similarity: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n: usize,
    /// Pearson r between DIoU (alignment) and similarity.
    pub pearson_diou: f64,
    /// Pearson r between IoU and similarity.
    pub pearson_iou: f64,
    /// Equal-count bins ordered by DIoU deviation.
    pub bins_diou: Vec<CorrelationBin>,
    /// Equal-count bins ordered by IoU deviation.
    pub bins_iou: Vec<CorrelationBin>,
}

impl CorrelationReport {
    /// Mean similarity never rises from one DIoU-deviation bin to the next.
    pub fn similarity_non_increasing(&self) -> bool {
        self.bins_diou
            .windows(2)
            .all(|w| w[1].mean_similarity <= w[0].mean_similarity)
    }
}

/// Sample Pearson correlation; 0 when either variable is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

fn bins(points: &[CorrelationPoint], deviation: impl Fn(&CorrelationPoint) -> f64) -> Vec<CorrelationBin> {
    let mut sorted: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (deviation(p), p.similarity))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = sorted.len();
    (0..N_BINS)
        .map(|b| {
            let chunk = &sorted[b * n / N_BINS..(b + 1) * n / N_BINS];
            let count = chunk.len();
            let mean = |f: fn(&(f64, f64)) -> f64| chunk.iter().map(f).sum::<f64>() / count as f64;
            CorrelationBin {
                deviation_lo: chunk.first().map_or(f64::NAN, |c| c.0),
                deviation_hi: chunk.last().map_or(f64::NAN, |c| c.0),
                mean_deviation: mean(|c| c.0),
                mean_similarity: mean(|c| c.1),
                count,
            }
        })
        .collect()
}

pub fn correlation_report(points: &[CorrelationPoint]) -> Result<CorrelationReport> {
    if points.len() < MIN_CORRELATION_PAIRS {
        return Err(Error::TooFewPairs {
            need: MIN_CORRELATION_PAIRS,
            got: points.len(),
        });
    }
    let sim: Vec<f64> = points.iter().map(|p| p.similarity).collect();
    let diou: Vec<f64> = points.iter().map(|p| p.diou).collect();
    let iou: Vec<f64> = points.iter().map(|p| p.iou).collect();
    Ok(CorrelationReport {
        n: points.len(),
        pearson_diou: pearson(&diou, &sim),
        pearson_iou: pearson(&iou, &sim),
        bins_diou: bins(points, CorrelationPoint::diou_deviation),
        bins_iou: bins(points, CorrelationPoint::iou_deviation),
    })
}

/// Points for index-aligned teacher/student instances of one image.
pub fn pair_points(teacher: &PredictionSet, student: &PredictionSet) -> Result<Vec<CorrelationPoint>> {
    if teacher.len() != student.len() {
        return Err(Error::LengthMismatch(teacher.len(), student.len()));
    }
    teacher
        .instances
        .iter()
        .zip(&student.instances)
        .map(|(t, s)| {
            Ok(CorrelationPoint {
                diou: polygon_diou(&t.polygon, &s.polygon)?,
                iou: polygon_iou(&t.polygon, &s.polygon),
                similarity: text_similarity(&t.transcription, &s.transcription),
            })
        })
        .collect()
}

/// `n_pairs` points from scenes whose jitter runs over `levels` evenly spaced
/// values in `(0, sigma_max]`.
pub fn graded_jitter_points(
    base: &SynthConfig,
    n_pairs: usize,
    levels: usize,
    sigma_max: f64,
) -> Result<Vec<CorrelationPoint>> {
    let levels = levels.max(1);
    let per_image = base.n_instances.max(1);
    let mut points = Vec::with_capacity(n_pairs);
    let mut level = 0usize;
    while points.len() < n_pairs {
        let cfg = SynthConfig {
            seed: base.seed.wrapping_add(level as u64),
            n_instances: per_image,
            jitter_sigma: sigma_max * ((level % levels) + 1) as f64 / levels as f64,
            ..base.clone()
        };
        let needed = (n_pairs - points.len()).div_ceil(per_image);
        let images = needed.min(n_pairs.div_ceil(per_image * levels)).max(1);
        for scene in synth_scenes(&cfg, images)? {
            points.extend(pair_points(&scene.teacher, &scene.student)?);
        }
        level += 1;
    }
    points.truncate(n_pairs);
    Ok(points)
}
