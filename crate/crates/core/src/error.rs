use thiserror::Error;

/// Errors raised by the causal-polytope toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid correlation: {0}")]
    InvalidCorrelation(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("budget exceeded after {partial} items: {what}")]
    BudgetExceeded { what: String, partial: usize },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("strategy is not causal")]
    NotCausal,
    #[error("unknown inequality name `{0}`")]
    UnknownName(String),
    #[error("inequality cannot be read as a uniform-input game: {0}")]
    NotGameConvertible(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
