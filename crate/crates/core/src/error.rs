use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("recurrent dimension d={0}: the Green's function is infinite for d < 3")]
    RecurrentDimension(usize),

    #[error("unsupported dimension {0} (supported: 1..={max})", max = crate::lattice::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty set")]
    EmptySet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("loop length {0} must be even and at least 2")]
    InvalidLength(usize),

    #[error("sets intersect: the source and target must be disjoint")]
    SetsIntersect,

    #[error("set of {size} points exceeds the direct-solve limit of {limit}")]
    SetTooLarge { size: usize, limit: usize },

    #[error("Green matrix is not positive definite or is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("window too small: radius {needed} requested, window radius is {radius}")]
    WindowTooSmall { needed: i64, radius: i64 },

    #[error("point lies outside the window")]
    OutOfWindow,

    #[error("loop index {index} out of range for a soup of {len} loops")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("expected {expected:.3e} loops exceeds the memory budget of {budget:.3e}")]
    MemoryBudget { expected: f64, budget: f64 },

    #[error("only {accepted} samples accepted (need at least {needed}); increase the sample budget")]
    InsufficientSamples { accepted: u64, needed: u64 },

    #[error("boundary-touch rate {rate:.4} is not below {limit}; use a larger window")]
    BoundaryTouch { rate: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
