use thiserror::Error;

/// Errors produced by the tensor, linear-algebra and recovery routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mode index {0}, expected 1, 2 or 3")]
    InvalidMode(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank {rank} out of range for size {size}")]
    RankOutOfRange { rank: usize, size: usize },

    #[error("rank-deficient input: |R[{index},{index}]| = {value:e} below threshold {threshold:e}")]
    RankDeficient {
        index: usize,
        value: f64,
        threshold: f64,
    },

    #[error("index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("ground truth tensor has zero norm")]
    ZeroGroundTruth,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("iterate diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("malformed ensemble file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
