//! Detection and end-to-end spotting metrics.
//!
//! Predictions are visited by descending score and each claims the unclaimed
//! ground truth with the highest IoU at or above the threshold. End-to-end
//! counts reuse that matching and additionally require the (case-insensitive)
//! transcriptions to agree, so they can never exceed the detection counts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polygon_iou;
use crate::instance::PredictionSet;
use crate::text::{levenshtein, Transcription};

/// Upper-cased word list used to correct predictions before comparison.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    words: Vec<Transcription>,
}

impl Lexicon {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut words: Vec<Transcription> = words
            .into_iter()
            .map(|w| Transcription::from(w.as_ref().trim()).to_uppercase())
            .filter(|w| !w.is_empty())
            .collect();
        words.sort();
        words.dedup();
        Self { words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Closest lexicon word by edit distance on upper-cased text; ties go to the
/// lexicographically smallest word. `None` for an empty lexicon.
pub fn nearest_lexicon_word<'a>(word: &Transcription, lexicon: &'a Lexicon) -> Option<&'a Transcription> {
    let upper = word.to_uppercase();
    // words are sorted, so the first minimum is the lexicographic tie-break
    lexicon
        .words
        .iter()
        .min_by_key(|w| levenshtein(&upper, w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEval {
    pub image_id: String,
    pub n_pred: usize,
    pub n_gt: usize,
    pub det_tp: usize,
    pub e2e_tp_none: usize,
    pub e2e_tp_full: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub e2e_hmean_none: f64,
    /// Only present when a lexicon was supplied.
    pub e2e_hmean_full: Option<f64>,
    pub per_image: Vec<ImageEval>,
}

/// `(pred, gt)` pairs of the score-ordered greedy matching.
pub fn greedy_match(pred: &PredictionSet, gt: &PredictionSet, iou_thresh: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| {
        pred.instances[b]
            .score
            .total_cmp(&pred.instances[a].score)
            .then(a.cmp(&b))
    });
    let mut claimed = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for p in order {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt_inst) in gt.instances.iter().enumerate() {
            if claimed[g] {
                continue;
            }
            let iou = polygon_iou(&pred.instances[p].polygon, &gt_inst.polygon);
            if iou >= iou_thresh && best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        if let Some((g, _)) = best {
            claimed[g] = true;
            pairs.push((p, g));
        }
    }
    pairs
}

fn pair_images<'a>(
    preds: &'a [PredictionSet],
    gts: &'a [PredictionSet],
) -> Result<Vec<(&'a PredictionSet, &'a PredictionSet)>> {
    let mut by_id: HashMap<&str, &PredictionSet> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.image_id.as_str(), p).is_some() {
            return Err(Error::DuplicateImage(p.image_id.clone()));
        }
    }
    let mut seen = HashMap::with_capacity(gts.len());
    let mut out = Vec::with_capacity(gts.len());
    for g in gts {
        if seen.insert(g.image_id.as_str(), ()).is_some() {
            return Err(Error::DuplicateImage(g.image_id.clone()));
        }
        let p = by_id
            .get(g.image_id.as_str())
            .ok_or_else(|| Error::MissingImage(g.image_id.clone()))?;
        out.push((*p, g));
    }
    if let Some(p) = preds.iter().find(|p| !seen.contains_key(p.image_id.as_str())) {
        return Err(Error::MissingImage(p.image_id.clone()));
    }
    Ok(out)
}

fn prf(tp: usize, n_pred: usize, n_gt: usize) -> (f64, f64, f64) {
    let p = if n_pred == 0 { 0.0 } else { tp as f64 / n_pred as f64 };
    let r = if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

fn same_word(pred: &Transcription, gt: &Transcription) -> bool {
    pred.to_uppercase() == gt.to_uppercase()
}

/// Full report over all images; the lexicon enables the `Full` protocol.
pub fn evaluate(
    preds: &[PredictionSet],
    gts: &[PredictionSet],
    lexicon: Option<&Lexicon>,
    iou_thresh: f64,
) -> Result<EvalReport> {
    let mut per_image = Vec::new();
    for (pred, gt) in pair_images(preds, gts)? {
        let pairs = greedy_match(pred, gt, iou_thresh);
        let mut none = 0;
        let mut full = 0;
        for &(p, g) in &pairs {
            let pt = &pred.instances[p].transcription;
            let gt_t = &gt.instances[g].transcription;
            if same_word(pt, gt_t) {
                none += 1;
            }
            if let Some(lex) = lexicon {
                let corrected = nearest_lexicon_word(pt, lex).unwrap_or(pt);
                if same_word(corrected, gt_t) {
                    full += 1;
                }
            }
        }
        per_image.push(ImageEval {
            image_id: gt.image_id.clone(),
            n_pred: pred.len(),
            n_gt: gt.len(),
            det_tp: pairs.len(),
            e2e_tp_none: none,
            e2e_tp_full: lexicon.map(|_| full),
        });
    }
    let n_pred: usize = per_image.iter().map(|i| i.n_pred).sum();
    let n_gt: usize = per_image.iter().map(|i| i.n_gt).sum();
    let det_tp: usize = per_image.iter().map(|i| i.det_tp).sum();
    let none_tp: usize = per_image.iter().map(|i| i.e2e_tp_none).sum();
    let (precision, recall, f1) = prf(det_tp, n_pred, n_gt);
    let e2e_hmean_full = lexicon.map(|_| {
        let tp = per_image.iter().filter_map(|i| i.e2e_tp_full).sum();
        prf(tp, n_pred, n_gt).2
    });
    Ok(EvalReport {
        precision,
        recall,
        f1,
        e2e_hmean_none: prf(none_tp, n_pred, n_gt).2,
        e2e_hmean_full,
        per_image,
    })
}

/// Detection precision, recall and F1.
pub fn detection_prf(preds: &[PredictionSet], gts: &[PredictionSet], iou_thresh: f64) -> Result<(f64, f64, f64)> {
    let r = evaluate(preds, gts, None, iou_thresh)?;
    Ok((r.precision, r.recall, r.f1))
}

/// End-to-end H-mean at IoU 0.5, with lexicon correction when given.
pub fn e2e_hmean(preds: &[PredictionSet], gts: &[PredictionSet], lexicon: Option<&Lexicon>) -> Result<f64> {
    let r = evaluate(preds, gts, lexicon, 0.5)?;
    Ok(r.e2e_hmean_full.unwrap_or(r.e2e_hmean_none))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::instance::TextInstance;
    use crate::text::CharConfidences;

    fn inst(x: f64, text: &str, score: f64) -> TextInstance {
        let poly = Polygon::from_coords(&[
            (x, 0.1),
            (x + 0.05, 0.1),
            (x + 0.1, 0.1),
            (x + 0.1, 0.2),
            (x + 0.05, 0.2),
            (x, 0.2),
        ])
        .unwrap();
        let t = Transcription::from(text);
        let c = CharConfidences::new(vec![0.9; t.len()]).unwrap();
        TextInstance::new(poly, score, t, c, None).unwrap()
    }

    fn img(id: &str, inst: Vec<TextInstance>) -> PredictionSet {
        PredictionSet::new(id, 100, 100).with_instances(inst)
    }

    #[test]
    fn perfect_predictions() {
        let gt = vec![img("a", vec![inst(0.1, "STOP", 1.0), inst(0.5, "Exit", 1.0)])];
        let lex = Lexicon::new(["STOP", "EXIT"]);
        let r = evaluate(&gt, &gt, Some(&lex), 0.5).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        assert_eq!(r.e2e_hmean_none, 1.0);
        assert_eq!(r.e2e_hmean_full, Some(1.0));
    }

    #[test]
    fn no_predictions() {
        let gt = vec![img("a", vec![inst(0.1, "STOP", 1.0)])];
        let pred = vec![img("a", vec![])];
        assert_eq!(detection_prf(&pred, &gt, 0.5).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn half_recall() {
        let gt = vec![img("a", vec![inst(0.1, "STOP", 1.0), inst(0.5, "EXIT", 1.0)])];
        let pred = vec![img("a", vec![inst(0.1, "STOP", 0.9)])];
        let (p, r, f) = detection_prf(&pred, &gt, 0.5).unwrap();
        assert_eq!((p, r), (1.0, 0.5));
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_text_is_zero_e2e() {
        let gt = vec![img("a", vec![inst(0.1, "STOP", 1.0)])];
        let pred = vec![img("a", vec![inst(0.1, "XXXX", 0.9)])];
        assert_eq!(e2e_hmean(&pred, &gt, None).unwrap(), 0.0);
        assert_eq!(detection_prf(&pred, &gt, 0.5).unwrap().2, 1.0);
    }

    #[test]
    fn lexicon_fixes_single_char_error() {
        let gt = vec![img("a", vec![inst(0.1, "STOP", 1.0)])];
        let pred = vec![img("a", vec![inst(0.1, "ST0P", 0.9)])];
        let lex = Lexicon::new(["STOP", "SHOP"]);
        let none = e2e_hmean(&pred, &gt, None).unwrap();
        let full = e2e_hmean(&pred, &gt, Some(&lex)).unwrap();
        assert!(full > none);
        assert_eq!(full, 1.0);
    }

    #[test]
    fn lexicon_tie_breaks_lexicographically() {
        let lex = Lexicon::new(["SHOP", "STOP"]);
        let w = nearest_lexicon_word(&"SXOP".into(), &lex).unwrap();
        assert_eq!(w.to_string(), "SHOP");
        assert!(nearest_lexicon_word(&"A".into(), &Lexicon::default()).is_none());
    }

    #[test]
    fn case_insensitive_match() {
        let gt = vec![img("a", vec![inst(0.1, "Stop", 1.0)])];
        let pred = vec![img("a", vec![inst(0.1, "sTOP", 0.9)])];
        assert_eq!(e2e_hmean(&pred, &gt, None).unwrap(), 1.0);
    }

    #[test]
    fn duplicate_and_missing_ids() {
        let gt = vec![img("a", vec![]), img("a", vec![])];
        assert!(matches!(
            evaluate(&gt[..1], &gt, None, 0.5),
            Err(Error::DuplicateImage(_))
        ));
        let pred = vec![img("b", vec![])];
        assert!(matches!(
            evaluate(&pred, &gt[..1], None, 0.5),
            Err(Error::MissingImage(_))
        ));
    }

    #[test]
    fn higher_score_claims_first() {
        let gt = vec![img("a", vec![inst(0.1, "STOP", 1.0)])];
        let pred = vec![img("a", vec![inst(0.1, "XXXX", 0.5), inst(0.1, "STOP", 0.9)])];
        let r = evaluate(&pred, &gt, None, 0.5).unwrap();
        assert_eq!(r.per_image[0].det_tp, 1);
        assert_eq!(r.per_image[0].e2e_tp_none, 1);
        assert_eq!(r.precision, 0.5);
    }
}
