//! Flat-array entry point for in-process callers (e.g. a training loop
//! binding). Buffers are validated here, before the engine sees them, and
//! converted with the same arithmetic as the JSONL loader so results match
//! the file-based path bit for bit.

use serde::{Deserialize, Serialize};

use crate::assignment::{Engine, Tier};
use crate::error::{Error, Result};
use crate::format::normalize_point;
use crate::geometry::Polygon;
use crate::instance::{PredictionSet, TextInstance};
use crate::pipeline::{assign_image, AssignRow, RunConfig};
use crate::text::{CharConfidences, Transcription};

/// One image as flat buffers. Coordinates are in pixels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BatchImage {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    /// Points per boundary (`K`); each polygon has `2K` points.
    pub k_points: usize,
    /// `x0, y0, x1, y1, ...` for every instance, `4K · n` values.
    pub coords: Vec<f64>,
    pub scores: Vec<f64>,
    pub transcriptions: Vec<String>,
    pub char_conf: Vec<Vec<f64>>,
    /// `n · max_len · classes` values when present.
    pub char_dists: Option<Vec<f64>>,
}

fn field(name: &str, msg: impl Into<String>) -> Error {
    Error::Field {
        field: name.to_string(),
        msg: msg.into(),
    }
}

impl BatchImage {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Shape and value checks; names the offending field.
    pub fn validate(&self, max_len: usize, classes: usize) -> Result<()> {
        let n = self.scores.len();
        if self.width == 0 || self.height == 0 {
            return Err(field("width/height", "must be positive"));
        }
        if n > 0 && self.k_points < 3 {
            return Err(field("k_points", "must be >= 3"));
        }
        if self.coords.len() != 4 * self.k_points * n {
            return Err(field(
                "coords",
                format!("length {} != 4·K·n = {}", self.coords.len(), 4 * self.k_points * n),
            ));
        }
        if let Some(i) = self.coords.iter().position(|v| !v.is_finite()) {
            return Err(field("coords", format!("non-finite value at {i}")));
        }
        if let Some(i) = self.scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(field("scores", format!("value at {i} outside [0, 1]")));
        }
        if self.transcriptions.len() != n {
            return Err(field("transcriptions", format!("{} entries, expected {n}", self.transcriptions.len())));
        }
        if self.char_conf.len() != n {
            return Err(field("char_conf", format!("{} rows, expected {n}", self.char_conf.len())));
        }
        for (i, (t, c)) in self.transcriptions.iter().zip(&self.char_conf).enumerate() {
            if t.chars().count() != c.len() {
                return Err(field("char_conf", format!("row {i} does not match its transcription")));
            }
            if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(field("char_conf", format!("row {i} has a value outside [0, 1]")));
            }
        }
        if let Some(d) = &self.char_dists {
            if d.len() != n * max_len * classes {
                return Err(field(
                    "char_dists",
                    format!("length {} != n·max_len·classes = {}", d.len(), n * max_len * classes),
                ));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(field("char_dists", "non-finite value"));
            }
        }
        Ok(())
    }

    pub fn to_prediction_set(&self, max_len: usize, classes: usize) -> Result<PredictionSet> {
        self.validate(max_len, classes)?;
        let stride = 4 * self.k_points;
        let slab = max_len * classes;
        let instances = (0..self.len())
            .map(|i| {
                let pts = self.coords[i * stride..(i + 1) * stride]
                    .chunks_exact(2)
                    .map(|xy| normalize_point(xy[0], xy[1], self.width, self.height))
                    .collect();
                let dists = self.char_dists.as_ref().map(|d| {
                    d[i * slab..(i + 1) * slab]
                        .chunks_exact(classes)
                        .map(<[f64]>::to_vec)
                        .collect()
                });
                TextInstance::new(
                    Polygon::text(pts)?,
                    self.scores[i],
                    Transcription::from(self.transcriptions[i].as_str()),
                    CharConfidences::new(self.char_conf[i].clone())?,
                    dists,
                )
                .map_err(|e| field(&format!("instance {i}"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PredictionSet {
            image_id: self.image_id.clone(),
            width: self.width,
            height: self.height,
            instances,
        })
    }

    pub fn from_prediction_set(set: &PredictionSet) -> Self {
        let k = set.instances.first().map_or(0, |i| i.polygon.len() / 2);
        let (w, h) = (set.width as f64, set.height as f64);
        let has_dists = !set.is_empty() && set.instances.iter().all(|i| i.char_dists.is_some());
        BatchImage {
            image_id: set.image_id.clone(),
            width: set.width,
            height: set.height,
            k_points: k,
            coords: set
                .instances
                .iter()
                .flat_map(|i| i.polygon.points().iter().flat_map(|p| [p.x * w, p.y * h]))
                .collect(),
            scores: set.instances.iter().map(|i| i.score).collect(),
            transcriptions: set.instances.iter().map(|i| i.transcription.to_string()).collect(),
            char_conf: set.instances.iter().map(|i| i.char_conf.probs().to_vec()).collect(),
            char_dists: has_dists.then(|| {
                set.instances
                    .iter()
                    .flat_map(|i| i.char_dists.as_ref().unwrap().iter().flatten().copied())
                    .collect()
            }),
        }
    }
}

/// Struct-of-arrays result of [`bind_assign`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BatchOutput {
    pub dropped: Vec<usize>,
    pub det_only_student: Vec<usize>,
    pub det_only_teacher: Vec<usize>,
    pub e2e_student: Vec<usize>,
    pub e2e_teacher: Vec<usize>,
    pub pair_student: Vec<usize>,
    pub pair_teacher: Vec<usize>,
    /// 0 = det-only, 1 = end-to-end.
    pub pair_tier: Vec<u8>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub diou: Vec<f64>,
    pub disparity: Vec<f64>,
    pub cost_total: Vec<f64>,
}

impl From<&AssignRow> for BatchOutput {
    fn from(row: &AssignRow) -> Self {
        let mut out = BatchOutput {
            dropped: row.dropped.clone(),
            ..Default::default()
        };
        for &(s, t) in &row.det_only {
            out.det_only_student.push(s);
            out.det_only_teacher.push(t);
        }
        for &(s, t) in &row.e2e {
            out.e2e_student.push(s);
            out.e2e_teacher.push(t);
        }
        for p in &row.pairs {
            out.pair_student.push(p.student);
            out.pair_teacher.push(p.teacher);
            out.pair_tier.push(match p.tier {
                Tier::DetOnly => 0,
                Tier::E2e => 1,
            });
            out.alpha.push(p.alpha);
            out.beta.push(p.beta);
            out.diou.push(p.diou);
            out.disparity.push(p.disparity);
            out.cost_total.push(p.cost.total);
        }
        out
    }
}

/// Assignment plus factors for one image given as flat buffers.
pub fn bind_assign(
    engine: &Engine,
    teacher: &BatchImage,
    student: &BatchImage,
    cfg: &RunConfig,
) -> Result<BatchOutput> {
    let (max_len, classes) = (engine.text_ctx.max_len, engine.text_ctx.alphabet.classes());
    let t = teacher.to_prediction_set(max_len, classes)?;
    let s = student.to_prediction_set(max_len, classes)?;
    Ok(BatchOutput::from(&assign_image(engine, &t, &s, cfg)?))
}
