//! Uncertainty of quantum states with respect to a fixed projective measurement.
//!
//! The measurement basis is the computational basis {|i>}; every uncertainty
//! quantity is a function of the diagonal of the density matrix in that basis.
//! The crate provides:
//!
//! - state/channel primitives at desk-scale dimension ([`state`], [`random`]),
//! - uncertainty measures generated by symmetric concave functions, with
//!   quantum/classical decompositions ([`measures`]),
//! - predicates for certain and uncertainty-preserving channels plus the
//!   twirling and constant-diagonal constructions ([`channels`]),
//! - coherence of assistance via decomposition search ([`assist`]),
//! - JSON file formats for states and channels ([`io`]).

pub mod assist;
pub mod channels;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod random;
pub mod state;

pub use error::{Error, Result};
pub use linalg::{C64, CMatrix, CVector};
pub use state::{DensityMatrix, Keep, ProbabilityVector, PureState};

use std::sync::OnceLock;

static TOL_STRUCT: OnceLock<f64> = OnceLock::new();

/// Structural tolerance for type invariants (Hermiticity, trace, positivity,
/// normalization, Kraus completeness). Defaults to 1e-9; the `UNCERT_TOL`
/// environment variable overrides it, read once per process.
pub fn tol_struct() -> f64 {
    *TOL_STRUCT.get_or_init(|| {
        std::env::var("UNCERT_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(1e-9)
    })
}

/// Eigenvalues at or below this are treated as numerically zero rank.
pub const TOL_RANK: f64 = 1e-10;
