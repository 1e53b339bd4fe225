use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::TextInstance;
use crate::registry::{Named, Registry};
use crate::text::{text_disparity, Alphabet, Transcription};

/// Probabilities are floored here before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Decoder layout shared by the text-cost strategies.
#[derive(Debug, Clone)]
pub struct TextCostContext {
    pub alphabet: Arc<Alphabet>,
    /// Fixed decoder length.
    pub max_len: usize,
}

impl Default for TextCostContext {
    fn default() -> Self {
        Self {
            alphabet: Arc::new(Alphabet::latin()),
            max_len: 25,
        }
    }
}

/// Recognition term of the matching cost.
pub trait TextCost: Named + Send + Sync {
    fn cost(
        &self,
        student: &TextInstance,
        pseudo: &Transcription,
        ctx: &TextCostContext,
    ) -> Result<f64>;
}

pub type TextCostRegistry = Registry<dyn TextCost>;

/// Padded cross-entropy of the student's slot distributions against the
/// pseudo transcription; padding slots target the padding class.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossEntropyTextCost;

impl Named for CrossEntropyTextCost {
    fn name(&self) -> &'static str {
        "ce"
    }
}

impl TextCost for CrossEntropyTextCost {
    fn cost(
        &self,
        student: &TextInstance,
        pseudo: &Transcription,
        ctx: &TextCostContext,
    ) -> Result<f64> {
        let dists = student
            .char_dists
            .as_ref()
            .ok_or(Error::MissingDistributions)?;
        if pseudo.is_empty() {
            return Err(Error::EmptyPseudoText);
        }
        if pseudo.len() > ctx.max_len {
            return Err(Error::TranscriptionTooLong {
                len: pseudo.len(),
                max: ctx.max_len,
            });
        }
        if dists.len() != ctx.max_len {
            return Err(Error::LengthMismatch(dists.len(), ctx.max_len));
        }
        let want = ctx.alphabet.classes();
        let mut total = 0.0;
        for (slot, row) in dists.iter().enumerate() {
            if row.len() != want {
                return Err(Error::DistributionWidth {
                    row: slot,
                    got: row.len(),
                    want,
                });
            }
            let target = match pseudo.chars().get(slot) {
                Some(&c) => ctx.alphabet.index_of(c).ok_or_else(|| {
                    Error::Config(format!("symbol {c:?} is not in the alphabet"))
                })?,
                None => ctx.alphabet.pad_index(),
            };
            total -= row[target].max(PROB_FLOOR).ln();
        }
        Ok(total / ctx.max_len as f64)
    }
}

/// Fallback for students without distributions: normalized edit distance
/// between the decoded student text and the pseudo transcription.
#[derive(Debug, Clone, Copy, Default)]
pub struct DisparityTextCost;

impl Named for DisparityTextCost {
    fn name(&self) -> &'static str {
        "disparity"
    }
}

impl TextCost for DisparityTextCost {
    fn cost(&self, student: &TextInstance, pseudo: &Transcription, _: &TextCostContext) -> Result<f64> {
        Ok(text_disparity(&student.transcription, pseudo))
    }
}

pub fn default_text_costs() -> TextCostRegistry {
    let mut r = TextCostRegistry::empty();
    r.register(Arc::new(CrossEntropyTextCost))
        .register(Arc::new(DisparityTextCost));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::text::CharConfidences;

    fn student(dists: Option<Vec<Vec<f64>>>) -> TextInstance {
        let poly = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        TextInstance::new(poly, 0.9, Transcription::default(), CharConfidences::default(), dists)
            .unwrap()
    }

    fn one_hot(ctx: &TextCostContext, word: &str) -> Vec<Vec<f64>> {
        let chars: Vec<char> = word.chars().collect();
        (0..ctx.max_len)
            .map(|slot| {
                let mut row = vec![0.0; ctx.alphabet.classes()];
                let idx = chars
                    .get(slot)
                    .map(|&c| ctx.alphabet.index_of(c).unwrap())
                    .unwrap_or(ctx.alphabet.pad_index());
                row[idx] = 1.0;
                row
            })
            .collect()
    }

    #[test]
    fn perfect_prediction_costs_zero() {
        let ctx = TextCostContext::default();
        let s = student(Some(one_hot(&ctx, "HELLO")));
        let c = CrossEntropyTextCost.cost(&s, &"HELLO".into(), &ctx).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn uniform_prediction_costs_ln_classes() {
        let ctx = TextCostContext::default();
        let row = vec![1.0 / 97.0; 97];
        let s = student(Some(vec![row; 25]));
        let c = CrossEntropyTextCost.cost(&s, &"WORD".into(), &ctx).unwrap();
        assert!((c - 97f64.ln()).abs() < 1e-12);
        assert!((c - 4.5747).abs() < 1e-4);
    }

    #[test]
    fn random_distributions_match_direct_lookup() {
        let ctx = TextCostContext {
            alphabet: Arc::new(Alphabet::from_reader("a\nb\nc\n".as_bytes()).unwrap()),
            max_len: 4,
        };
        // deterministic pseudo-random rows over 4 classes
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) + 0.05
        };
        let dists: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let raw: Vec<f64> = (0..4).map(|_| next()).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / s).collect()
            })
            .collect();
        // "cab" -> targets c=2, a=0, b=1, pad=3
        let oracle =
            -(dists[0][2].ln() + dists[1][0].ln() + dists[2][1].ln() + dists[3][3].ln()) / 4.0;
        let s = student(Some(dists));
        let got = CrossEntropyTextCost.cost(&s, &"cab".into(), &ctx).unwrap();
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn missing_distributions_point_to_fallback() {
        let ctx = TextCostContext::default();
        let err = CrossEntropyTextCost
            .cost(&student(None), &"A".into(), &ctx)
            .unwrap_err();
        assert_eq!(err, Error::MissingDistributions);
        assert!(err.to_string().contains("disparity"));
    }

    #[test]
    fn shape_errors() {
        let ctx = TextCostContext::default();
        let s = student(Some(one_hot(&ctx, "A")));
        assert!(CrossEntropyTextCost.cost(&s, &"".into(), &ctx).is_err());
        let long: String = "x".repeat(26);
        assert!(matches!(
            CrossEntropyTextCost.cost(&s, &long.as_str().into(), &ctx),
            Err(Error::TranscriptionTooLong { .. })
        ));
    }

    #[test]
    fn registry_lookup() {
        let r = default_text_costs();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["ce", "disparity"]);
        assert!(r.get("ce").is_ok());
        assert!(matches!(r.get("bleu"), Err(Error::UnknownStrategy(n)) if n == "bleu"));
    }
}
