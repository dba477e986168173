use thiserror::Error;

/// Errors produced anywhere in the modem, channel, solver or harness layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix argument had the wrong length or shape.
    #[error("input shape: {0}")]
    InputShape(String),

    /// A parameter violates a documented precondition.
    #[error("configuration: {0}")]
    Config(String),

    /// A pivot fell below the relative tolerance during factorization.
    #[error(
        "numerical singularity: pivot magnitude {magnitude:e} at row {row} is below {tolerance:e}"
    )]
    Singular {
        row: usize,
        magnitude: f64,
        tolerance: f64,
    },

    /// A dense reference routine was asked to work past its size guard.
    #[error("resource guard: {0}")]
    Resource(String),

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InputShape(msg.into()))
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
