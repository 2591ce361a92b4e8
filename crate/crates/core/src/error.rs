use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("step count q = {0} outside the supported range 1..=7")]
    StepCountOutOfRange(usize),

    #[error("the zero polynomial is not a valid input here")]
    ZeroPolynomial,

    #[error("a polynomial of degree >= 1 is required")]
    ConstantPolynomial,

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: String, hi: String },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    RootsNotConverged { iterations: usize, residual: f64 },

    #[error("scheme is not zero-stable")]
    NotZeroStable,

    #[error("polynomial has a root on the unit circle: {0}")]
    UnimodularRoot(String),

    #[error("roots of the reduced polynomial are not strictly inside the unit disk")]
    RootsOutsideDisk,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exact solution required for exact seeding")]
    MissingExactSolution,

    #[error("time step {tau} does not divide the horizon {horizon}")]
    StepDoesNotDivide { tau: f64, horizon: f64 },

    #[error("singular step: leading coefficient vanishes for mode {mode}")]
    SingularStep { mode: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
