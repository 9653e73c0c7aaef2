use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid probability space: {0}")]
    InvalidProbability(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Inflation requested over a measure that is not a supremum of
    /// expectations over a scenario set.
    #[error("inflation requires a coherent base with a scenario representation, got {0}")]
    NotInflatable(String),

    #[error("invalid agent space: {0}")]
    InvalidAgents(String),

    #[error("operation requires a {expected} market")]
    WrongFamily { expected: &'static str },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("simplex iteration cap of {0} exceeded")]
    IterationCap(usize),

    #[error("linear program is {0}")]
    LpStatus(&'static str),

    /// No density has finite aggregate penalty, so the value function is −∞.
    #[error("ill-posed market: no density has finite aggregate penalty")]
    IllPosed,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),
}
