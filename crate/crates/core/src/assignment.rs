//! Progressive sample assignment: filter teacher predictions, match them to
//! student predictions, and split the matches into detection-only and
//! end-to-end pseudo-labels.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::PredictionSet;
use crate::matching::{
    cost_matrix, default_assigners, default_text_costs, AssignerRegistry, CostWeights,
    MatchResult, TextCostContext, TextCostRegistry,
};
use crate::text::Alphabet;

/// Training stage; selects the assignment strategy by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    O2m,
    #[default]
    O2o,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::O2m => "o2m",
            Stage::O2o => "o2o",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "o2m" => Ok(Stage::O2m),
            "o2o" => Ok(Stage::O2o),
            other => Err(Error::Config(format!("unknown stage `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsaConfig {
    pub t_det: f64,
    pub t_rec: f64,
    pub enable_cc: bool,
    pub stage: Stage,
    pub k_o2m: usize,
    pub weights: CostWeights,
    /// Registered text-cost strategy (`ce` or `disparity`).
    pub text_cost: String,
}

impl Default for PsaConfig {
    fn default() -> Self {
        Self {
            t_det: 0.4,
            t_rec: 0.7,
            enable_cc: true,
            stage: Stage::O2o,
            k_o2m: 6,
            weights: CostWeights::default(),
            text_cost: "ce".to_string(),
        }
    }
}

impl PsaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_det", self.t_det), ("t_rec", self.t_rec)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {t}")));
            }
        }
        if self.k_o2m == 0 {
            return Err(Error::Config("k_o2m must be >= 1".into()));
        }
        self.weights.validate()
    }
}

/// Pseudo-label tier of a matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    DetOnly,
    E2e,
}

/// Matched `(student, teacher)` pairs split by tier. Teacher indices refer to
/// the unfiltered teacher set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HierarchicalLabels {
    pub det_only: Vec<(usize, usize)>,
    pub e2e: Vec<(usize, usize)>,
    pub dropped: Vec<usize>,
}

impl HierarchicalLabels {
    pub fn tier_of(&self, pair: (usize, usize)) -> Option<Tier> {
        if self.e2e.contains(&pair) {
            Some(Tier::E2e)
        } else if self.det_only.contains(&pair) {
            Some(Tier::DetOnly)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.det_only.len() + self.e2e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Teacher set after the joint score/text constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredTeacher {
    pub retained: PredictionSet,
    /// `original_index[r]` is the unfiltered index of retained instance `r`.
    pub original_index: Vec<usize>,
    pub dropped: Vec<usize>,
}

/// Keeps instances with `score >= t_det` and a non-void transcription.
pub fn joint_constraint_filter(teacher: &PredictionSet, t_det: f64) -> FilteredTeacher {
    let mut retained = PredictionSet::new(teacher.image_id.clone(), teacher.width, teacher.height);
    let mut original_index = Vec::new();
    let mut dropped = Vec::new();
    for (i, inst) in teacher.instances.iter().enumerate() {
        if inst.score >= t_det && !inst.transcription.is_void() {
            retained.instances.push(inst.clone());
            original_index.push(i);
        } else {
            dropped.push(i);
        }
    }
    FilteredTeacher {
        retained,
        original_index,
        dropped,
    }
}

/// Recognition qualification: `c_t > t_rec` and, with CC, `c_t > c_s`.
pub fn qualifies_e2e(teacher_conf: f64, student_conf: f64, t_rec: f64, enable_cc: bool) -> bool {
    teacher_conf > t_rec && (!enable_cc || teacher_conf > student_conf)
}

/// Splits matches into tiers. Match indices must address `teacher` and `student`.
pub fn recognition_filter(
    matches: &MatchResult,
    teacher: &PredictionSet,
    student: &PredictionSet,
    t_rec: f64,
    enable_cc: bool,
) -> Result<HierarchicalLabels> {
    let mut labels = HierarchicalLabels::default();
    for p in &matches.pairs {
        let t = teacher.instances.get(p.teacher).ok_or(Error::IndexOutOfRange {
            index: p.teacher,
            len: teacher.len(),
        })?;
        let s = student.instances.get(p.student).ok_or(Error::IndexOutOfRange {
            index: p.student,
            len: student.len(),
        })?;
        if qualifies_e2e(t.confidence(), s.confidence(), t_rec, enable_cc) {
            labels.e2e.push((p.student, p.teacher));
        } else {
            labels.det_only.push((p.student, p.teacher));
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub labels: HierarchicalLabels,
    /// Teacher indices already mapped back to the unfiltered set.
    pub matches: MatchResult,
}

/// Strategy registries plus decoder layout.
#[derive(Debug, Clone)]
pub struct Engine {
    pub assigners: Arc<AssignerRegistry>,
    pub text_costs: Arc<TextCostRegistry>,
    pub text_ctx: TextCostContext,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(Alphabet::latin(), 25)
    }
}

impl Engine {
    pub fn new(alphabet: Alphabet, max_len: usize) -> Self {
        Self {
            assigners: Arc::new(default_assigners()),
            text_costs: Arc::new(default_text_costs()),
            text_ctx: TextCostContext {
                alphabet: Arc::new(alphabet),
                max_len,
            },
        }
    }

    /// filter → cost matrix → stage assigner → recognition filter.
    pub fn assign(
        &self,
        teacher: &PredictionSet,
        student: &PredictionSet,
        cfg: &PsaConfig,
    ) -> Result<Assignment> {
        cfg.validate()?;
        let assigner = self.assigners.get(cfg.stage.as_str())?;
        let text_cost = self.text_costs.get(&cfg.text_cost)?;
        let filtered = joint_constraint_filter(teacher, cfg.t_det);
        let matrix = cost_matrix(
            &student.instances,
            &filtered.retained.instances,
            &cfg.weights,
            text_cost.as_ref(),
            &self.text_ctx,
        )?;
        let mut matches = assigner.assign(&matrix, cfg.k_o2m);
        for p in &mut matches.pairs {
            p.teacher = filtered.original_index[p.teacher];
        }
        let mut labels = recognition_filter(&matches, teacher, student, cfg.t_rec, cfg.enable_cc)?;
        labels.dropped = filtered.dropped;
        Ok(Assignment { labels, matches })
    }
}

/// [`Engine::assign`] with the default engine.
pub fn assign(teacher: &PredictionSet, student: &PredictionSet, cfg: &PsaConfig) -> Result<Assignment> {
    Engine::default().assign(teacher, student, cfg)
}
