use thiserror::Error;

/// Crate-wide error type. Input problems and numerical failures are kept
/// in separate variants so the CLI can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("form is not positive definite (minimum eigenvalue {min_eig})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error reflects bad input rather than a failed
    /// computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Model(_) | Error::Dimension(_) | Error::Argument(_) | Error::Io(_)
        )
    }
}
