//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SifError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{what} index {index} out of range 1..={bound}")]
    IndexOutOfRange {
        what: &'static str,
        index: i64,
        bound: usize,
    },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("grid mismatch: N={lhs} vs N={rhs}")]
    GridMismatch { lhs: usize, rhs: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("signal has fewer than two strict extrema; nothing to sift")]
    NoOscillation,

    #[error("signal norm is zero; stopping ratio undefined")]
    DegenerateSignal,

    #[error("signal contains non-finite values")]
    NonFiniteSignal,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("operator file: bad magic")]
    BadMagic,

    #[error("operator file: unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("operator file: checksum mismatch")]
    ChecksumMismatch,

    #[error("operator file: truncated")]
    Truncated,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SifError>;
