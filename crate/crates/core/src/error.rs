use thiserror::Error;

/// Errors produced by sequence validation, feature extraction, and queries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence `{id}` has length {n}, need at least {min}")]
    TooShort { id: String, n: usize, min: usize },

    #[error("sequence `{id}` has a non-finite sample at index {index}")]
    NonFiniteSample { id: String, index: usize },

    #[error("sequence `{id}` has zero standard deviation")]
    ZeroStd { id: String },

    #[error("cannot store {k} coefficients of a length-{n} sequence (need 2k + 1 <= n)")]
    TooManyCoefficients { k: usize, n: usize },

    #[error("coefficient count must be at least 1")]
    ZeroCoefficients,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("stored coefficient count mismatch: {left} vs {right}")]
    CoefficientMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("threshold must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("negative half-width {0} in query region")]
    NegativeHalfWidth(f64),

    #[error("non-finite coordinate {0} in index entry")]
    NonFiniteCoordinate(f64),

    #[error("max fanout must be at least 4, got {0}")]
    FanoutTooSmall(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset sequences have inconsistent lengths: {left} vs {right} (sequence `{id}`)")]
    RaggedLengths {
        id: String,
        left: usize,
        right: usize,
    },

    #[error("sequence `{id}` not found in the store")]
    UnknownSequence { id: String },

    #[error("duplicate sequence id `{id}`")]
    DuplicateId { id: String },

    #[error("k-nearest-neighbor count must be at least 1")]
    ZeroNeighbors,

    #[error("invalid selectivity parameters: {0}")]
    InvalidSelectivity(String),

    #[error("invalid generator spec: {0}")]
    InvalidGenSpec(String),

    #[error("csv error at line {line}: {msg}")]
    CsvFormat { line: u64, msg: String },

    #[error("sequence `{id}` has length {n}, below the configured minimum {min}")]
    BelowMinLength { id: String, n: usize, min: usize },

    #[error("malformed snapshot: {0}")]
    BadSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
