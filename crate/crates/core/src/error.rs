use thiserror::Error;

/// Errors shared by all field operations.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid construction invalid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("fiber dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("exponent {p} not admissible: {reason}")]
    BadExponent { p: f64, reason: &'static str },
    #[error("eigenvalue {min_eigenvalue} below the positivity tolerance")]
    NotPositive { min_eigenvalue: f64 },
    #[error("operator deviates from self-adjointness by {deviation}")]
    NotHermitian { deviation: f64 },
    #[error("series increment {term} dips to {min_value}, below the monotonicity tolerance")]
    NonMonotone { term: usize, min_value: f64 },
    #[error("truncation rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("exterior series depth {depth} exceeds fiber dimension {dim}")]
    TruncationTooDeep { depth: usize, dim: usize },
    #[error("|z| * sup trace norm = {product} reaches the log-series convergence radius")]
    OutsideConvergenceRadius { product: f64 },
    #[error("Re z = {re} is not in the half-plane Re z > {p}")]
    OutOfHalfPlane { re: f64, p: f64 },
    #[error("largest eigenvalue {max_eigenvalue} exceeds the contraction bound 1")]
    NotContraction { max_eigenvalue: f64 },
    #[error("angle {alpha} outside (0, pi/2)")]
    BadAngle { alpha: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("projection field violates P^2 = P* = P: {0}")]
    InvalidProjection(String),
    #[error("bump profiles are not a partition of unity: {0}")]
    NotPartitionOfUnity(String),
    #[error("vector field is not in the module: residual {residual}")]
    NotInModule { residual: f64 },
    #[error("operator does not act on the module: residual {residual}")]
    NotModuleOperator { residual: f64 },
    #[error("operator-order precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("measured norm {measured} exceeds the proven bound {bound}")]
    BoundViolated { measured: f64, bound: f64 },
    #[error("fields do not commute pointwise: commutator norm {norm}")]
    NotCommuting { norm: f64 },
    #[error("parameter domain violated: {0}")]
    BadDomain(String),
    #[error("discretization needs at least {min} interior points, got {got}")]
    GridTooCoarse { min: usize, got: usize },
    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, FieldError>;
