use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity error: dimension {requested} exceeds the cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// U1^dagger U2 is proportional to the identity: no finite number of
    /// queries separates the pair.
    #[error("indistinguishable pair: theta = {theta:e}")]
    Indistinguishable { theta: f64 },

    #[error("unambiguous discrimination impossible: overlap {overlap} is 1")]
    UnambiguousImpossible { overlap: f64 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
