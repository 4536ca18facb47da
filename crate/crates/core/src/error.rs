use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid innovation model: {0}")]
    InvalidInnovation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No unique CLS estimator exists for the sample.
    #[error("estimator undefined: x_1 = ... = x_(n-2) = 0")]
    Undefined,

    /// A limit functional hit a vanishing denominator.
    #[error("degenerate denominator {0:e}")]
    DegenerateDenominator(f64),

    #[error("{undefined} of {total} replications had no CLS estimator; increase n")]
    TooManyUndefined { undefined: usize, total: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
