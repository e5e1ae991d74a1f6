use thiserror::Error;

/// Errors produced by the trajectory-distance routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("curve generation failed: {0}")]
    Generation(String),

    #[error("range [{lo}, {hi}] invalid for length {len}")]
    Range { lo: usize, hi: usize, len: usize },

    /// The rectangle cover does not reach the target grid point. This cannot
    /// happen when the distance bounds are valid.
    #[error("rectangle cover misses grid point ({i}, {j})")]
    Coverage { i: u32, j: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
