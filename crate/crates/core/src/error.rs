use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{quantity} is not representable in double precision at n = {n}")]
    Overflow { quantity: &'static str, n: usize },

    #[error("f is not finite at {location} (value {value})")]
    Evaluation { location: String, value: f64 },

    #[error("degenerate generalized operator: {0}")]
    DegenerateSpec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
