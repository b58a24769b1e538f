use thiserror::Error;

/// Errors raised by the discretization, control, solver and reconstruction layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
