use thiserror::Error;

/// Errors reported by problem construction and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid bounds at index {index}: lower {lower} must be strictly below upper {upper}")]
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("point is not feasible: {0}")]
    Infeasible(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("a Hessian oracle is required by the {0} variant")]
    MissingHessian(&'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("predicted reduction must be positive, got {0}")]
    NonPositivePrediction(f64),

    #[error("complementarity pair ({0}, {1}) is not feasible")]
    InfeasiblePair(f64, f64),

    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("problem file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
