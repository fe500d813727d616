use thiserror::Error;

/// Errors raised by the certification kernel.
///
/// Numeric payloads are reported in `f64` regardless of the working scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("operator is not Hermitian (anti-Hermitian residual {residual:e}, allowed {allowed:e})")]
    NotHermitian { residual: f64, allowed: f64 },
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("operator is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("family is not a frame (lower bound {lower:e}, upper bound {upper:e})")]
    NotAFrame { lower: f64, upper: f64 },
    #[error("frame bounds must be strictly positive (got lower {lower}, upper {upper})")]
    BadBounds { lower: f64, upper: f64 },
    #[error("K is numerically zero (norm {norm:e})")]
    ZeroK { norm: f64 },
    #[error("instance is not certified: {0}")]
    NotCertified(String),
    #[error("K x is not in the synthesis range (relative residual {residual:e})")]
    OutOfRange { residual: f64 },
    #[error("C and K do not commute (residual {residual:e}, allowed {allowed:e})")]
    CommutationViolated { residual: f64, allowed: f64 },
    #[error("perturbation condition failed: {0}")]
    ConditionFailed(String),
    #[error("projected range Q(R(K)) is the zero subspace")]
    DegenerateProjector,
    #[error("perturbed family spans the zero subspace")]
    SpanCollapse,
    #[error("random draw degenerate after {attempts} attempts")]
    DegenerateDraw { attempts: usize },
    #[error("requested rank {rank} outside 0..={dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, FrameError>;
