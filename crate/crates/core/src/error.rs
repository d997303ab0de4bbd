use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e} (requested {tolerance:e})")]
    NonConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::OutOfRegime(_) | Error::Config { .. } => 1,
            Error::Io(_) | Error::Json(_) => 2,
            Error::NonConvergence { .. } | Error::Factorization(_) => 3,
        }
    }
}
