//! JSONL prediction files: one image per line, pixel coordinates.
//!
//! ```text
//! {"image_id":"img_1","width":1280,"height":720,"instances":[
//!   {"polygon":[[x,y],...],"score":0.9,"transcription":"STOP","char_conf":[...],"char_dists":[[...]]}]}
//! ```
//!
//! Polygons are normalized by image width/height on load and scaled back on
//! write. An optional first line carrying a `fingerprint` key is a header and
//! is skipped by the reader.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Polygon};
use crate::instance::{PredictionSet, TextInstance};
use crate::text::{CharConfidences, Transcription};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub polygon: Vec<[f64; 2]>,
    pub score: f64,
    pub transcription: String,
    pub char_conf: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_dists: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<InstanceRecord>,
}

/// First line of every file the CLI writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub fingerprint: String,
    pub command: String,
    pub config: serde_json::Value,
}

/// Pixel to normalized coordinates.
pub fn normalize_point(x: f64, y: f64, width: u32, height: u32) -> Point {
    Point::new(x / width as f64, y / height as f64)
}

impl ImageRecord {
    pub fn into_prediction_set(self) -> crate::Result<PredictionSet> {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 {
            return Err(crate::Error::Field {
                field: "width/height".into(),
                msg: "must be positive".into(),
            });
        }
        let instances = self
            .instances
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let at = |e: crate::Error| crate::Error::Field {
                    field: format!("instances[{i}]"),
                    msg: e.to_string(),
                };
                let pts = r
                    .polygon
                    .iter()
                    .map(|&[x, y]| normalize_point(x, y, w, h))
                    .collect();
                let polygon = Polygon::text(pts).map_err(at)?;
                let conf = CharConfidences::new(r.char_conf).map_err(at)?;
                TextInstance::new(
                    polygon,
                    r.score,
                    Transcription::from(r.transcription.as_str()),
                    conf,
                    r.char_dists,
                )
                .map_err(at)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(PredictionSet {
            image_id: self.image_id,
            width: w,
            height: h,
            instances,
        })
    }

    pub fn from_prediction_set(set: &PredictionSet) -> Self {
        let (w, h) = (set.width as f64, set.height as f64);
        ImageRecord {
            image_id: set.image_id.clone(),
            width: set.width,
            height: set.height,
            instances: set
                .instances
                .iter()
                .map(|inst| InstanceRecord {
                    polygon: inst.polygon.points().iter().map(|p| [p.x * w, p.y * h]).collect(),
                    score: inst.score,
                    transcription: inst.transcription.to_string(),
                    char_conf: inst.char_conf.probs().to_vec(),
                    char_dists: inst.char_dists.clone(),
                })
                .collect(),
        }
    }
}

fn is_header(value: &serde_json::Value) -> bool {
    value.get("fingerprint").is_some() && value.get("image_id").is_none()
}

/// Reads a prediction file; errors name the 1-based line.
pub fn read_predictions(reader: impl BufRead) -> Result<Vec<PredictionSet>, FormatError> {
    let mut out = Vec::new();
    let mut first = true;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| FormatError::Schema {
            line: lineno,
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        if first && is_header(&value) {
            first = false;
            continue;
        }
        first = false;
        let record: ImageRecord =
            serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
        out.push(
            record
                .into_prediction_set()
                .map_err(|e| schema(e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn write_predictions<'a>(
    mut w: impl Write,
    sets: impl IntoIterator<Item = &'a PredictionSet>,
) -> Result<(), FormatError> {
    for set in sets {
        serde_json::to_writer(&mut w, &ImageRecord::from_prediction_set(set))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
