use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("delay tap {tap} exceeds frame length {n}")]
    DelayExceedsFrame { tap: usize, n: usize },

    #[error("channel profile has no taps")]
    EmptyProfile,

    #[error("bit length {len} is not a multiple of {bits_per_symbol}")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, Error>;
