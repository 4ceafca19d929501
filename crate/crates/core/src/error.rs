use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time series must contain at least one sample")]
    EmptySeries,

    #[error("sample {index} has dimension {found}, expected {expected}")]
    RaggedSeries {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid segmentation: segment length {segment_len}, hop {hop} (need 1 <= hop <= segment length)")]
    InvalidPlan { segment_len: usize, hop: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid length {len}: {reason}")]
    InvalidLength { len: usize, reason: &'static str },

    #[error("segment index {index} out of range (maximum valid index is {max:?})")]
    SegmentOutOfRange { index: usize, max: Option<usize> },

    #[error("insufficient data: {samples} samples, segment length {segment_len}")]
    InsufficientData { samples: usize, segment_len: usize },

    #[error("invalid frequency grid: {0}")]
    InvalidFrequency(String),

    #[error("segment {got} applied out of order, expected segment {expected}")]
    OutOfOrder { expected: usize, got: usize },

    #[error("checkpoint {checkpoint} out of range ({available} segments available)")]
    CheckpointOutOfRange { checkpoint: usize, available: usize },

    #[error("checkpoints must be positive and strictly increasing")]
    UnsortedCheckpoints,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("moment order mismatch: expected statistics at order {expected}, got order {found}")]
    OrderMismatch { expected: f64, found: f64 },

    #[error("divergent sum: {0}")]
    Divergence(String),

    #[error("degenerate chain: {0}")]
    Degenerate(String),

    #[error("invalid transition matrix: {0}")]
    InvalidTransition(String),
}
