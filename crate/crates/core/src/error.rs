use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or unsupported container contents.
    #[error("format error in {field}: {msg}")]
    Format { field: &'static str, msg: String },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    /// An operation's input violates its precondition (odd sizes, bad counts...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Scheme parameter or key invariant violated.
    #[error("invalid {field}: {msg}")]
    Invariant { field: &'static str, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Format { field, msg: msg.into() }
    }

    pub(crate) fn invariant(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Invariant { field, msg: msg.into() }
    }
}
