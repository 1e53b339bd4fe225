//! Desk-scale verification harness: synthetic scenes with controlled
//! teacher/student noise, spotting evaluation, and the deviation/similarity
//! correlation study.

mod correlation;
mod eval;
mod synth;

pub use correlation::{
    correlation_report, graded_jitter_points, pearson, pair_points, CorrelationBin,
    CorrelationPoint, CorrelationReport, MIN_CORRELATION_PAIRS, N_BINS,
};
pub use eval::{
    detection_prf, e2e_hmean, evaluate, greedy_match, nearest_lexicon_word, EvalReport,
    ImageEval, Lexicon,
};
pub use synth::{synth_scene, synth_scenes, Scene, SynthConfig, WORDS};
