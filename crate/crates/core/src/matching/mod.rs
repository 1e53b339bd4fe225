//! Student ↔ pseudo-label matching costs and bipartite assignment.

mod assigner;
mod hungarian;
mod one_to_many;
mod text_cost;

pub use assigner::{default_assigners, Assigner, AssignerRegistry, HungarianAssigner, OneToManyAssigner};
pub use hungarian::{hungarian, hungarian_cost};
pub use one_to_many::one_to_many_assign;
pub use text_cost::{
    default_text_costs, CrossEntropyTextCost, DisparityTextCost, TextCost, TextCostContext,
    TextCostRegistry, PROB_FLOOR,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::instance::TextInstance;


pub const FOCAL_ALPHA: f64 = 0.25;
pub const FOCAL_GAMMA: f64 = 2.0;
const SCORE_CLAMP: f64 = 1e-6;

/// Focal classification cost of score `s` against binary target `positive`.
pub fn focal_cost(s: f64, positive: bool) -> f64 {
    let s = s.clamp(SCORE_CLAMP, 1.0 - SCORE_CLAMP);
    if positive {
        FOCAL_ALPHA * (1.0 - s).powf(FOCAL_GAMMA) * -s.ln()
    } else {
        (1.0 - FOCAL_ALPHA) * s.powf(FOCAL_GAMMA) * -(1.0 - s).ln()
    }
}

/// Mean absolute coordinate difference over all points and both axes.
pub fn coord_cost(a: &Polygon, b: &Polygon) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::PointCountMismatch(a.len(), b.len()));
    }
    let sum: f64 = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| (p.x - q.x).abs() + (p.y - q.y).abs())
        .sum();
    Ok(sum / (2 * a.len()) as f64)
}

/// Weights of the classification, recognition and coordinate terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub cls: f64,
    pub text: f64,
    pub coord: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            cls: 1.0,
            text: 1.0,
            coord: 0.5,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("cls", self.cls), ("text", self.text), ("coord", self.coord)] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!("weight {name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            cls: self.cls * factor,
            text: self.text * factor,
            coord: self.coord * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub cls: f64,
    pub text: f64,
    pub coord: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(cls: f64, text: f64, coord: f64, w: &CostWeights) -> Self {
        Self {
            cls,
            text,
            coord,
            total: w.cls * cls + w.text * text + w.coord * coord,
        }
    }
}

/// Dense `students × pseudo-labels` cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<CostBreakdown>,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, student: usize, pseudo: usize) -> &CostBreakdown {
        &self.entries[student * self.cols + pseudo]
    }

    /// Weighted totals as nested rows.
    pub fn totals(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).total).collect())
            .collect()
    }
}

/// Composite cost of every student against every pseudo-label (targets all positive).
pub fn cost_matrix(
    students: &[TextInstance],
    pseudos: &[TextInstance],
    weights: &CostWeights,
    text_cost: &dyn TextCost,
    ctx: &TextCostContext,
) -> Result<CostMatrix> {
    let mut entries = Vec::with_capacity(students.len() * pseudos.len());
    for s in students {
        let cls = focal_cost(s.score, true);
        for p in pseudos {
            let text = text_cost.cost(s, &p.transcription, ctx)?;
            let coord = coord_cost(&s.polygon, &p.polygon)?;
            entries.push(CostBreakdown::new(cls, text, coord, weights));
        }
    }
    Ok(CostMatrix {
        rows: students.len(),
        cols: pseudos.len(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    OneToOne,
    OneToMany,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub student: usize,
    pub teacher: usize,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub mode: MatchMode,
}

impl MatchResult {
    /// Attaches costs to raw `(student, pseudo)` index pairs, sorted by student.
    pub fn from_pairs(matrix: &CostMatrix, mut raw: Vec<(usize, usize)>, mode: MatchMode) -> Self {
        raw.sort_unstable();
        let pairs = raw
            .into_iter()
            .map(|(s, t)| MatchedPair {
                student: s,
                teacher: t,
                cost: *matrix.get(s, t),
            })
            .collect();
        Self { pairs, mode }
    }

    pub fn total_cost(&self) -> f64 {
        self.pairs.iter().map(|p| p.cost.total).sum()
    }

    /// Checks the cardinality invariant of the mode (`k` bounds teacher reuse).
    pub fn is_valid(&self, k: usize) -> bool {
        let mut students = std::collections::HashSet::new();
        let mut teachers = std::collections::HashMap::<usize, usize>::new();
        for p in &self.pairs {
            if !students.insert(p.student) {
                return false;
            }
            *teachers.entry(p.teacher).or_default() += 1;
        }
        let cap = match self.mode {
            MatchMode::OneToOne => 1,
            MatchMode::OneToMany => k,
        };
        teachers.values().all(|&n| n <= cap)
    }
}
