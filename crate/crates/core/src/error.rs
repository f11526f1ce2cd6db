use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is singular (sigma_min = {sigma_min:e})")]
    SingularMatrix { sigma_min: f64 },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("invalid offsets: {0}")]
    InvalidOffsets(String),
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("invalid bound: {0}")]
    InvalidBound(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
