use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} contains NaN or infinite entries")]
    NonFinite { what: &'static str },

    #[error("tolerance must be non-negative, got {0}")]
    NegativeTolerance(f64),

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("relaxation parameter must lie in (0, 2), got {0}")]
    InvalidLambda(f64),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("operation requires an atomic measure")]
    NotAtomic,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("order {order} exceeds the limit {max} for {context}")]
    OrderTooLarge {
        context: &'static str,
        order: usize,
        max: usize,
    },

    #[error("order {order} is below the minimum {min} for {context}")]
    OrderTooSmall {
        context: &'static str,
        order: usize,
        min: usize,
    },

    #[error("index {index} out of range for {context} (limit {limit})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("operator {index} is not an orthogonal projector (idempotence defect {idempotence:.3e}, symmetry defect {symmetry:.3e})")]
    NotProjector {
        index: usize,
        idempotence: f64,
        symmetry: f64,
    },

    #[error("task {index} is not a partial isometry")]
    NotPartialIsometry { index: usize },

    #[error("task {index} has operator norm {norm} > 1")]
    NormViolation { index: usize, norm: f64 },

    #[error("invalid task sequence: {0}")]
    InvalidTasks(String),

    #[error("{what} violated: residual {residual:.3e} exceeds {tol:.1e}")]
    IdentityViolation {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("iteration diverged at step {step}: error norm {error_norm:.3e} exceeds {limit:.3e}")]
    Divergence {
        step: usize,
        error_norm: f64,
        limit: f64,
    },
}
