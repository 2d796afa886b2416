use thiserror::Error;

/// Errors surfaced by instance validation, algorithms and parsers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("interval {id}: deadline must be strictly greater than release")]
    NonPositiveLength { id: usize },

    #[error("interval {id}: release time must be non-negative")]
    NegativeRelease { id: usize },

    #[error("duplicate interval id {id}")]
    DuplicateId { id: usize },

    #[error("prediction has {got} bits but the instance has {expected} intervals")]
    PredictionLengthMismatch { expected: usize, got: usize },

    #[error("exhaustive search rejected: {n} intervals exceed the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("instance is not two-value: {0}")]
    NotTwoValue(String),

    #[error("conflict-graph component is not a disagreement chain: {0}")]
    NotAChain(String),

    #[error("epsilon {epsilon} outside (0, {limit}) for delta {delta}")]
    BadEpsilon {
        epsilon: String,
        limit: String,
        delta: String,
    },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("malformed trace line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("trace contains no usable jobs")]
    EmptyTrace,

    #[error("online protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("cannot parse number {text:?}")]
    BadNumber { text: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
