//! Pseudo-label assignment and loss modulation for semi-supervised text
//! spotting.
//!
//! Teacher predictions are filtered, matched to student predictions with a
//! composite detection/recognition cost, and split into detection-only and
//! end-to-end pseudo-labels. Matched pairs then receive two modulation
//! factors: a spatial one (from polygon Distance-IoU) that scales the
//! recognition loss and a content one (from normalized edit distance) that
//! scales the regression loss.
//!
//! Assignment strategies and recognition cost terms are registered by name
//! (see [`matching::AssignerRegistry`] and [`matching::TextCostRegistry`]) and
//! picked at runtime from [`assignment::PsaConfig`].

pub mod assignment;
pub mod batch;
pub mod error;
pub mod format;
pub mod geometry;
pub mod harness;
pub mod instance;
pub mod matching;
pub mod mms;
pub mod pipeline;
pub mod registry;
pub mod text;

pub use error::{Error, Result};
pub use instance::{PredictionSet, TextInstance};
