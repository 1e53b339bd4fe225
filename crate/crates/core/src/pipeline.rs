//! Per-image composition of assignment and factor computation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{Engine, PsaConfig, Stage, Tier};
use crate::error::{Error, Result};
use crate::instance::PredictionSet;
use crate::matching::CostBreakdown;
use crate::mms::{compute_factors, MmsConfig, Reduction, DEFAULT_EMA_MOMENTUM, DEFAULT_LAMBDA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub psa: PsaConfig,
    pub lambda_scale: f64,
    pub ema_momentum: f64,
    pub reduction: Reduction,
    pub omega_l: f64,
    pub omega_u: f64,
    pub max_len: usize,
    /// Alphabet file; the built-in Latin set when absent.
    pub alphabet: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            psa: PsaConfig::default(),
            lambda_scale: DEFAULT_LAMBDA,
            ema_momentum: DEFAULT_EMA_MOMENTUM,
            reduction: Reduction::Mean,
            omega_l: 1.0,
            omega_u: 2.0,
            max_len: 25,
            alphabet: None,
        }
    }
}

impl RunConfig {
    pub fn mms(&self) -> MmsConfig {
        MmsConfig {
            t_rec: self.psa.t_rec,
            lambda_scale: self.lambda_scale,
            enable_cc: self.psa.enable_cc,
            stage: self.psa.stage,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.psa.validate()?;
        if !(self.lambda_scale >= 0.0 && self.lambda_scale.is_finite()) {
            return Err(Error::Config("lambda_scale must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.ema_momentum) {
            return Err(Error::Config("ema_momentum must lie in [0, 1]".into()));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub student: usize,
    pub teacher: usize,
    pub tier: Tier,
    pub cost: CostBreakdown,
    pub alpha: f64,
    pub beta: f64,
    pub diou: f64,
    pub disparity: f64,
}

/// One output row of the assignment command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignRow {
    pub image_id: String,
    pub stage: Stage,
    /// False in the one-to-many stage, where every factor is 1.
    pub mms_applied: bool,
    pub dropped: Vec<usize>,
    pub det_only: Vec<(usize, usize)>,
    pub e2e: Vec<(usize, usize)>,
    pub pairs: Vec<PairRecord>,
}

pub fn assign_image(
    engine: &Engine,
    teacher: &PredictionSet,
    student: &PredictionSet,
    cfg: &RunConfig,
) -> Result<AssignRow> {
    let assignment = engine.assign(teacher, student, &cfg.psa)?;
    let factors = compute_factors(teacher, student, &assignment.labels, &cfg.mms())?;
    let costs: HashMap<(usize, usize), CostBreakdown> = assignment
        .matches
        .pairs
        .iter()
        .map(|p| ((p.student, p.teacher), p.cost))
        .collect();
    let pairs = factors
        .into_iter()
        .map(|f| PairRecord {
            student: f.student,
            teacher: f.teacher,
            tier: f.tier,
            cost: costs[&(f.student, f.teacher)],
            alpha: f.alpha,
            beta: f.beta,
            diou: f.diou,
            disparity: f.disparity,
        })
        .collect();
    Ok(AssignRow {
        image_id: teacher.image_id.clone(),
        stage: cfg.psa.stage,
        mms_applied: cfg.psa.stage == Stage::O2o,
        dropped: assignment.labels.dropped,
        det_only: assignment.labels.det_only,
        e2e: assignment.labels.e2e,
        pairs,
    })
}

/// Pairs teacher and student images by id, in teacher order.
pub fn align_images<'a>(
    teachers: &'a [PredictionSet],
    students: &'a [PredictionSet],
) -> Result<Vec<(&'a PredictionSet, &'a PredictionSet)>> {
    let mut by_id: HashMap<&str, &PredictionSet> = HashMap::with_capacity(students.len());
    for s in students {
        if by_id.insert(&s.image_id, s).is_some() {
            return Err(Error::DuplicateImage(s.image_id.clone()));
        }
    }
    if teachers.len() != students.len() {
        let missing = teachers
            .iter()
            .find(|t| !by_id.contains_key(t.image_id.as_str()))
            .map(|t| t.image_id.clone())
            .unwrap_or_else(|| "<student surplus>".into());
        return Err(Error::MissingImage(missing));
    }
    let mut seen = std::collections::HashSet::new();
    teachers
        .iter()
        .map(|t| {
            if !seen.insert(t.image_id.as_str()) {
                return Err(Error::DuplicateImage(t.image_id.clone()));
            }
            by_id
                .get(t.image_id.as_str())
                .map(|s| (t, *s))
                .ok_or_else(|| Error::MissingImage(t.image_id.clone()))
        })
        .collect()
}
