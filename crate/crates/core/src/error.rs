use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label clash: {0}")]
    LabelClash(String),

    #[error("unknown subsystem: {0}")]
    UnknownSystem(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown example: {0}")]
    UnknownExample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
