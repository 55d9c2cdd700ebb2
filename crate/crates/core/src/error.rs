use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request reaches beyond a precomputed table or grid.
    #[error("range error: {0}")]
    Range(String),

    /// Quadrature or another numerical procedure failed to converge.
    #[error("numeric error: {message}")]
    Numeric {
        message: String,
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// An alternating sum lost too many significant digits.
    #[error("precision loss: {digits:.1} significant digits remain (need {required:.1}); use the integral form")]
    Precision { digits: f64, required: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            estimate: f64::NAN,
            error_estimate: f64::NAN,
            evaluations: 0,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
