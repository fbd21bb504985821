use thiserror::Error;

/// Errors produced by the co-clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: node id {id} out of bounds for {n} nodes")]
    NodeOutOfBounds { line: usize, id: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },

    #[error("n = {n} exceeds the dense guard of {limit}")]
    Capacity { n: usize, limit: usize },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("degenerate sketch: {0}")]
    DegenerateSketch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn dimension(expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// True for errors caused by bad input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::NodeOutOfBounds { .. }
                | Error::Dimension { .. }
                | Error::Validation { .. }
                | Error::Capacity { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
