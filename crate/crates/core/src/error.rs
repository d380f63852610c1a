use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (|A - A^*| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("map is not trace preserving (|sum E^*E - 1| = {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("outcome {outcome} has probability {probability:e}")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("observable is not sharp (idempotency residual {residual:e})")]
    NotSharp { residual: f64 },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("span is not closed under multiplication (residual {residual:e})")]
    NotAnAlgebra { residual: f64 },

    #[error("block decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("bad factorization: {0}")]
    BadFactorization(String),

    #[error("witness observable does not reproduce X (residual {residual:e})")]
    WitnessMismatch { residual: f64 },

    #[error("bad projectors: {0}")]
    BadProjectors(String),

    #[error("channel must map a space to itself (dim_in {dim_in}, dim_out {dim_out})")]
    NotEndomorphic { dim_in: usize, dim_out: usize },

    #[error("invalid stochastic map: {0}")]
    InvalidStochasticMap(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("computation cancelled")]
    Cancelled,

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
