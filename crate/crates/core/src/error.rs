use thiserror::Error;

use crate::weyl::Signature;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(Signature, Signature),

    #[error("operator contains z; expected an element of the non-homogenized ring")]
    ContainsZ,

    #[error("operator is not homogeneous")]
    NotHomogeneous,

    #[error("zero operator where a nonzero one is required ({0})")]
    ZeroOperator(&'static str),

    #[error("invalid linear form: {0}")]
    InvalidForm(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
