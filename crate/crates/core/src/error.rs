use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polygon needs an even number of points >= 6, got {0}")]
    BadPointCount(usize),
    #[error("polygon has a non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("polygon is self-intersecting (edges {0} and {1} cross)")]
    SelfIntersecting(usize, usize),
    #[error("point counts differ: {0} vs {1}")]
    PointCountMismatch(usize, usize),
    #[error("instance confidence of an empty character sequence")]
    EmptyConfidence,
    #[error("character confidences ({conf}) do not match transcription length ({text})")]
    ConfidenceLength { text: usize, conf: usize },
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceRange(f64),
    #[error("score {0} outside [0, 1]")]
    ScoreRange(f64),
    #[error(
        "student has no character distributions; select the `disparity` text cost to fall back to decoded text"
    )]
    MissingDistributions,
    #[error("character distribution row {row} has {got} entries, alphabet needs {want}")]
    DistributionWidth { row: usize, got: usize, want: usize },
    #[error("character distribution row {row} sums to {sum}")]
    DistributionSum { row: usize, sum: f64 },
    #[error("transcription of length {len} exceeds decoder length {max}")]
    TranscriptionTooLong { len: usize, max: usize },
    #[error("empty pseudo-label transcription")]
    EmptyPseudoText,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range for set of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("correlation needs at least {need} pairs, got {got}")]
    TooFewPairs { need: usize, got: usize },
    #[error("duplicate image id `{0}`")]
    DuplicateImage(String),
    #[error("image id `{0}` has no counterpart")]
    MissingImage(String),
    #[error("field `{field}`: {msg}")]
    Field { field: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
