use std::sync::Arc;

use super::{hungarian, one_to_many_assign, CostMatrix, MatchMode, MatchResult};
use crate::registry::{Named, Registry};

/// A bipartite assignment strategy over a cost matrix.
pub trait Assigner: Named + Send + Sync {
    fn mode(&self) -> MatchMode;

    /// Raw `(student, pseudo)` pairs. `k` bounds pseudo-label reuse where the
    /// strategy allows reuse at all.
    fn assign_raw(&self, totals: &[Vec<f64>], k: usize) -> Vec<(usize, usize)>;

    fn assign(&self, matrix: &CostMatrix, k: usize) -> MatchResult {
        let raw = self.assign_raw(&matrix.totals(), k);
        MatchResult::from_pairs(matrix, raw, self.mode())
    }
}

pub type AssignerRegistry = Registry<dyn Assigner>;

#[derive(Debug, Clone, Copy, Default)]
pub struct HungarianAssigner;

impl Named for HungarianAssigner {
    fn name(&self) -> &'static str {
        "o2o"
    }
}

impl Assigner for HungarianAssigner {
    fn mode(&self) -> MatchMode {
        MatchMode::OneToOne
    }

    fn assign_raw(&self, totals: &[Vec<f64>], _k: usize) -> Vec<(usize, usize)> {
        hungarian(totals)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OneToManyAssigner;

impl Named for OneToManyAssigner {
    fn name(&self) -> &'static str {
        "o2m"
    }
}

impl Assigner for OneToManyAssigner {
    fn mode(&self) -> MatchMode {
        MatchMode::OneToMany
    }

    fn assign_raw(&self, totals: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
        one_to_many_assign(totals, k)
    }
}

/// Registry with the one-to-one (`o2o`) and one-to-many (`o2m`) strategies.
pub fn default_assigners() -> AssignerRegistry {
    let mut r = AssignerRegistry::empty();
    r.register(Arc::new(HungarianAssigner))
        .register(Arc::new(OneToManyAssigner));
    r
}
