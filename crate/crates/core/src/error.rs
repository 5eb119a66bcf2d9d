use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight {weight}: {reason}")]
    InvalidWeight { weight: u32, reason: &'static str },

    #[error("insufficient coefficients: need {needed}, have {available}")]
    InsufficientCoefficients { needed: usize, available: usize },

    #[error("internal arithmetic error: {0}")]
    Internal(String),

    #[error("eigenvalue collision at weight {weight} (resolution {bits} bits)")]
    EigenvalueCollision { weight: u32, bits: u32 },

    #[error("eigenform verification failed at weight {weight}: residual {residual:e}")]
    VerificationFailed { weight: u32, residual: f64 },

    #[error("lambda({n}) cannot be assembled from stored values")]
    LambdaUnavailable { n: u64 },

    #[error("outside regime: {0}")]
    OutsideRegime(String),

    #[error("unreachable tolerance {rel_tol:e} (floor {floor:e})")]
    UnreachableTolerance { rel_tol: f64, floor: f64 },

    #[error("indeterminate: value not separated from its error bound")]
    Indeterminate,

    #[error("zero on contour at y = {y}")]
    ZeroOnContour { y: f64 },

    #[error("precision budget exhausted")]
    BudgetExhausted,

    #[error("degenerate vector at alpha = {alpha}")]
    DegenerateVector { alpha: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
