use std::io;

use thiserror::Error;

/// Errors surfaced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("no admissible cut: {0}")]
    NoCut(String),

    #[error("rejection loop gave up after {discards} consecutive discards (k = {k}, threshold = {threshold:e})")]
    DiscardLimit { discards: u64, k: usize, threshold: f64 },

    #[error("instance exceeds brute-force guard: k = {k} (max {max_k}), d = {d} (max {max_d}), n = {n} (max {max_n})")]
    SizeGuard {
        k: usize,
        d: usize,
        n: usize,
        max_k: usize,
        max_d: usize,
        max_n: usize,
    },

    #[error("not enough samples: got {got}, need at least {need}")]
    UnderSampled { got: usize, need: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
