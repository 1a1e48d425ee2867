//! Error types shared across the toolkit.

use thiserror::Error;

/// Toolkit-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input (dimension mismatch, empty image, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation that needs at least one selected element got none.
    #[error("empty selection: {0}")]
    EmptySelection(String),

    /// A regression fit has no unique solution.
    #[error("singular fit: {0}")]
    SingularFit(String),

    /// A class label was not found where one was required.
    #[error("unknown class: {0}")]
    UnknownClass(String),

    /// A file did not match its declared format.
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
