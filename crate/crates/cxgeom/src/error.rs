use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("contraction failure: estimated bound {bound:.6} not below {target}")]
    ContractionFailure { bound: f64, target: f64 },
    #[error("compatibility violation: max residual {0:.3e}")]
    CompatibilityViolation(f64),
    #[error("singular matrix at node {0}")]
    Singular(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
