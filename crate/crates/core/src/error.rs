use thiserror::Error;

/// Errors for state construction, linear algebra, and optimizer plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("dimension {dim} does not factor as {d_a}x{d_b}")]
    BadFactorization { dim: usize, d_a: usize, d_b: usize },

    #[error("not Hermitian: max asymmetry {max_asymmetry:e} exceeds {tol:e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },

    #[error("trace is not 1: |trace - 1| = {deviation:e} exceeds {tol:e}")]
    TraceNotOne { deviation: f64, tol: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{tol:e}")]
    NotPositive { min_eigenvalue: f64, tol: f64 },

    #[error("not normalized: |norm^2 - 1| = {deviation:e} exceeds {tol:e}")]
    NotNormalized { deviation: f64, tol: f64 },

    #[error("probabilities do not sum to 1: |sum - 1| = {deviation:e} exceeds {tol:e}")]
    NotAProbabilityVector { deviation: f64, tol: f64 },

    #[error("Kraus operators not complete: ||sum K'K - I||_max = {residual:e} exceeds {tol:e}")]
    NotComplete { residual: f64, tol: f64 },

    #[error("channel has no Kraus operators")]
    EmptyChannel,

    #[error("mixing matrix columns not orthonormal: residual {residual:e} exceeds {tol:e}")]
    NotIsometry { residual: f64, tol: f64 },

    #[error("requested rank {rank} exceeds dimension {dim} (or is zero)")]
    BadRank { rank: usize, dim: usize },

    #[error("dimension must be >= {min}, got {dim}")]
    BadDimension { dim: usize, min: usize },

    #[error("unknown measure '{0}' (expected var, entropy, or fidelity)")]
    UnknownMeasure(String),

    #[error("measure '{0}' has no pinned mixed-state coherence extension")]
    UnpinnedMeasure(String),

    #[error("function axiom '{axiom}' violated for '{name}': {detail}")]
    AxiomViolation {
        name: String,
        axiom: &'static str,
        detail: String,
    },

    #[error("invalid log base {0} (must be > 1)")]
    BadLogBase(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
