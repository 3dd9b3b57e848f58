use thiserror::Error;

/// Errors produced by fitting, segmentation and I/O.
#[derive(Debug, Error)]
pub enum ArcError {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The objective evaluated to NaN or an infinity during a search.
    #[error("objective is not finite at {point:?}")]
    NonFiniteObjective { point: Vec<f64> },

    /// The minimizer ran out of iterations. Carries the best point found.
    #[error(
        "optimizer did not converge within {iterations} iterations \
         (best value {value} at {point:?})"
    )]
    NotConverged {
        point: Vec<f64>,
        value: f64,
        iterations: usize,
    },

    /// Malformed input text.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed input that violates a data invariant.
    #[error("invalid data: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ArcError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }
}

pub type Result<T, E = ArcError> = std::result::Result<T, E>;
