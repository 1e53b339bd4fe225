//! Mutual mining between detection and recognition.
//!
//! * `alpha = 1 + DIoU(teacher, student)` scales the recognition loss of a pair.
//! * `beta = 1 + λ·D(q_t, q_s)` scales the regression loss of a qualified pair.
//!
//! Both are stop-gradient scalars. They are only applied in the one-to-one
//! stage; in the one-to-many stage every factor is 1.

use serde::{Deserialize, Serialize};

use crate::assignment::{qualifies_e2e, HierarchicalLabels, Stage, Tier};
use crate::error::{Error, Result};
use crate::geometry::{polygon_diou, Polygon};
use crate::instance::{PredictionSet, TextInstance};
use crate::text::text_disparity;

pub const DEFAULT_LAMBDA: f64 = 20.0;
pub const DEFAULT_EMA_MOMENTUM: f64 = 0.9996;

/// Spatial consistency factor in `[0, 2]`.
pub fn sci_factor(teacher_poly: &Polygon, student_poly: &Polygon) -> Result<f64> {
    Ok(1.0 + polygon_diou(teacher_poly, student_poly)?)
}

/// Content-aware regression factor in `[1, 1 + λ]`.
pub fn crc_factor(
    teacher: &TextInstance,
    student: &TextInstance,
    t_rec: f64,
    lambda_scale: f64,
    enable_cc: bool,
) -> f64 {
    if qualifies_e2e(teacher.confidence(), student.confidence(), t_rec, enable_cc) {
        1.0 + lambda_scale * text_disparity(&teacher.transcription, &student.transcription)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFactors {
    pub student: usize,
    pub teacher: usize,
    pub tier: Tier,
    pub alpha: f64,
    pub beta: f64,
    pub diou: f64,
    pub disparity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmsConfig {
    pub t_rec: f64,
    pub lambda_scale: f64,
    pub enable_cc: bool,
    pub stage: Stage,
}

impl Default for MmsConfig {
    fn default() -> Self {
        Self {
            t_rec: 0.7,
            lambda_scale: DEFAULT_LAMBDA,
            enable_cc: true,
            stage: Stage::O2o,
        }
    }
}

/// Factors for every labelled pair, ordered by student index.
pub fn compute_factors(
    teacher: &PredictionSet,
    student: &PredictionSet,
    labels: &HierarchicalLabels,
    cfg: &MmsConfig,
) -> Result<Vec<PairFactors>> {
    let mut pairs: Vec<(usize, usize, Tier)> = labels
        .det_only
        .iter()
        .map(|&(s, t)| (s, t, Tier::DetOnly))
        .chain(labels.e2e.iter().map(|&(s, t)| (s, t, Tier::E2e)))
        .collect();
    pairs.sort_unstable_by_key(|&(s, t, _)| (s, t));

    let lookup = |set: &PredictionSet, i: usize| -> Result<TextInstance> {
        set.instances
            .get(i)
            .cloned()
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: set.len(),
            })
    };
    pairs
        .into_iter()
        .map(|(s_idx, t_idx, tier)| {
            let t = lookup(teacher, t_idx)?;
            let s = lookup(student, s_idx)?;
            let diou = polygon_diou(&t.polygon, &s.polygon)?;
            let disparity = text_disparity(&t.transcription, &s.transcription);
            let (alpha, beta) = match cfg.stage {
                Stage::O2o => (
                    1.0 + diou,
                    crc_factor(&t, &s, cfg.t_rec, cfg.lambda_scale, cfg.enable_cc),
                ),
                Stage::O2m => (1.0, 1.0),
            };
            Ok(PairFactors {
                student: s_idx,
                teacher: t_idx,
                tier,
                alpha,
                beta,
                diou,
                disparity,
            })
        })
        .collect()
}

/// Unsupervised base losses of one matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PairLoss {
    pub cls: f64,
    pub reg: f64,
    pub rec: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Sum,
    /// Sums divided by the number of pairs.
    #[default]
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub l_sup: f64,
    pub pairs: Vec<PairLoss>,
    pub omega_l: f64,
    pub omega_u: f64,
}

/// `ω_l·L_l + ω_u·ΣL_cls + ω_u·Σ(β·L_reg + α·L_rec)`; recognition terms only
/// for end-to-end pairs.
pub fn unsupervised_loss(
    terms: &LossTerms,
    factors: &[PairFactors],
    reduction: Reduction,
) -> Result<f64> {
    if terms.pairs.len() != factors.len() {
        return Err(Error::LengthMismatch(terms.pairs.len(), factors.len()));
    }
    let mut cls = 0.0;
    let mut modulated = 0.0;
    for (l, f) in terms.pairs.iter().zip(factors) {
        for v in [l.cls, l.reg, l.rec] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("loss term {v} must be finite and >= 0")));
            }
        }
        cls += l.cls;
        modulated += f.beta * l.reg;
        if f.tier == Tier::E2e {
            modulated += f.alpha * l.rec;
        }
    }
    if reduction == Reduction::Mean && !factors.is_empty() {
        let n = factors.len() as f64;
        cls /= n;
        modulated /= n;
    }
    Ok(terms.omega_l * terms.l_sup + terms.omega_u * cls + terms.omega_u * modulated)
}

/// `m·teacher + (1 − m)·student`, elementwise.
pub fn ema_update(teacher: &[f64], student: &[f64], momentum: f64) -> Result<Vec<f64>> {
    if teacher.len() != student.len() {
        return Err(Error::LengthMismatch(teacher.len(), student.len()));
    }
    if !(0.0..=1.0).contains(&momentum) {
        return Err(Error::Config(format!("momentum {momentum} outside [0, 1]")));
    }
    Ok(teacher
        .iter()
        .zip(student)
        .map(|(t, s)| momentum * t + (1.0 - momentum) * s)
        .collect())
}
