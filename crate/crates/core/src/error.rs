use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("not a density operator: minimum eigenvalue {min_eigenvalue:e}")]
    NotAState { min_eigenvalue: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("size guard exceeded: {0}")]
    Guard(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("permutation scheme did not reach max error {bound} after {attempts} attempts (best {best})")]
    BoundNotMet { bound: f64, attempts: usize, best: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
