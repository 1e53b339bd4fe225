use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::text::{instance_confidence, CharConfidences, Transcription};

/// Tolerance on distribution row sums.
pub const DIST_SUM_TOL: f64 = 1e-6;

/// One predicted (or ground-truth) text instance in normalized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TextInstance {
    pub polygon: Polygon,
    pub score: f64,
    pub transcription: Transcription,
    pub char_conf: CharConfidences,
    /// Per decoder slot class distributions (symbols + padding). Students only.
    pub char_dists: Option<Vec<Vec<f64>>>,
}

impl TextInstance {
    pub fn new(
        polygon: Polygon,
        score: f64,
        transcription: Transcription,
        char_conf: CharConfidences,
        char_dists: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::ScoreRange(score));
        }
        if char_conf.len() != transcription.len() {
            return Err(Error::ConfidenceLength {
                text: transcription.len(),
                conf: char_conf.len(),
            });
        }
        if let Some(dists) = &char_dists {
            for (row, d) in dists.iter().enumerate() {
                let sum: f64 = d.iter().sum();
                if !sum.is_finite() || (sum - 1.0).abs() > DIST_SUM_TOL {
                    return Err(Error::DistributionSum { row, sum });
                }
            }
        }
        Ok(Self {
            polygon,
            score,
            transcription,
            char_conf,
            char_dists,
        })
    }

    /// Instance-level recognition confidence; 0 for an empty transcription.
    pub fn confidence(&self) -> f64 {
        instance_confidence(&self.char_conf).unwrap_or(0.0)
    }
}

/// All instances of one model on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<TextInstance>,
}

impl PredictionSet {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            image_id: image_id.into(),
            width,
            height,
            instances: Vec::new(),
        }
    }

    pub fn with_instances(mut self, instances: Vec<TextInstance>) -> Self {
        self.instances = instances;
        self
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}
