use num_complex::Complex64;
use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("order vector is empty")]
    EmptyOrders,
    #[error("order {index} is not an exact rational")]
    NonRationalOrder { index: usize },
    #[error("order {index} = {value} lies outside (0, 1]")]
    OrderOutOfRange { index: usize, value: String },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("dimension {n} exceeds the subset-enumeration limit of {max}")]
    TooManyStates { n: usize, max: usize },
    #[error("polynomial degree {degree} exceeds the limit of {max}")]
    DegreeTooLarge { degree: String, max: usize },
    #[error("polynomial is not monic")]
    NonMonic,
    #[error("polynomial has degree zero")]
    ZeroDegree,
    #[error("root finder did not converge (max backward residual {max_residual:e})")]
    ConvergenceFailure {
        partial: Vec<Complex64>,
        max_residual: f64,
    },
    #[error("matrix is singular (det A = 0)")]
    SingularMatrix,
    #[error("invalid epsilon {0}: must be a positive finite number")]
    InvalidEpsilon(f64),
    #[error("lambda_min(-(A + A^T)) = {lambda_min} is not positive")]
    HypothesisFailed { lambda_min: f64 },
    #[error("trajectory tail after t = {t_lo} has too few usable samples")]
    InsufficientTail { t_lo: f64 },
    #[error("Newton iteration diverged at step {step}{}", if *step == 1 { " (step size probably too large)" } else { "" })]
    NewtonDivergence { step: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
