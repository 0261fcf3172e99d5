//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown generator {name} for group {group}")]
    UnknownGenerator { group: String, name: String },

    #[error("near-degenerate spectrum: min eigenvalue separation {sep:.3e} below threshold {threshold:.3e}")]
    Degenerate { sep: f64, threshold: f64 },

    #[error("factorization singularity: {0}")]
    Singular(String),

    #[error("basis capacity exceeded: {dim} states > cap {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("state {0:?} not in basis")]
    OutOfBasis(Vec<usize>),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failure: {0}")]
    Backend(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
