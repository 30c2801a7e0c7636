use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transition matrix: {0}")]
    InvalidTransitionMatrix(String),

    #[error("word {word:?} is not allowed by the transition matrix")]
    DisallowedWord { word: Vec<usize> },

    #[error("capacity cap exceeded: need {needed} table entries, cap is {cap}")]
    CapacityExceeded { needed: usize, cap: usize },

    #[error("theta must lie in (0,1), got {0}")]
    InvalidTheta(f64),

    #[error("algebra descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    #[error("shift mismatch: transition matrices differ")]
    ShiftMismatch,

    #[error("element is not strictly positive: min eigenvalue {min_eigenvalue} < {eps}")]
    NotStrictlyPositive { min_eigenvalue: f64, eps: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("word of length {got} is shorter than the function depth {depth}")]
    WordTooShort { got: usize, depth: usize },

    #[error("power iteration did not converge after {steps} steps (last residual {residual})")]
    NonConvergence { steps: usize, residual: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("leading eigenvalue is degenerate: {count} eigenvalues within {tol} of 1")]
    DegenerateLeadingEigenvalue { count: usize, tol: f64 },

    #[error("invalid scalar potential: {0}")]
    InvalidScalarPotential(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochasticMatrix(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
