use thiserror::Error;

/// Errors raised across the compiler pipeline.
///
/// The variants mirror the failure classes the CLI maps to exit codes:
/// range/dimension/validation problems are caller mistakes, numeric errors
/// mean a factorization could not certify its own residual.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numeric failure: {msg} (residual {residual:.3e})")]
    Numeric { msg: String, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            msg: msg.into(),
            residual,
        }
    }

    /// Prefixes the message with a location (used to annotate recursion paths).
    pub fn context(self, at: &str) -> Self {
        match self {
            Error::Range(m) => Error::Range(format!("{at}: {m}")),
            Error::Dimension(m) => Error::Dimension(format!("{at}: {m}")),
            Error::Validation(m) => Error::Validation(format!("{at}: {m}")),
            Error::Numeric { msg, residual } => Error::Numeric {
                msg: format!("{at}: {msg}"),
                residual,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
