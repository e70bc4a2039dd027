//! Seeded random ensembles for property tests and sweeps.
//!
//! Every sampler is deterministic for a fixed seed; nothing here touches
//! global RNG state.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector};
use crate::state::{DensityMatrix, PureState};

/// Ensemble selector for [`sample_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    HaarPure,
    GinibreMixed,
    HaarUnitary,
    RankLimited(usize),
}

/// Output of [`sample_random`].
#[derive(Debug, Clone)]
pub enum Sample {
    Pure(PureState),
    Mixed(DensityMatrix),
    Unitary(CMatrix),
}

/// Deterministic ChaCha stream for a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 step; decorrelates per-task seeds derived from one master seed.
pub fn derive_seed(master: u64, idx: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(idx.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; u clamped away from 0.
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn complex_normal(rng: &mut impl Rng) -> C64 {
    C64::new(
        standard_normal(rng) / 2.0_f64.sqrt(),
        standard_normal(rng) / 2.0_f64.sqrt(),
    )
}

/// Complex Ginibre matrix: iid standard complex normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed pure state.
pub fn haar_pure(dim: usize, rng: &mut impl Rng) -> PureState {
    loop {
        let v: CVector = DVector::from_fn(dim, |_, _| complex_normal(rng));
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the R-diagonal
/// phase fix (so the distribution is exactly Haar, not QR-biased).
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    haar_isometry(dim, dim, rng)
}

/// rows x cols matrix with orthonormal columns, Haar on the Stiefel manifold.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 1e-300 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank mixed state rho = G G' / Tr(G G').
pub fn ginibre_mixed(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    rank_limited_mixed(dim, dim, rng).expect("dim <= dim")
}

/// Mixed state of rank exactly `rank` (almost surely).
pub fn rank_limited_mixed(dim: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = ginibre(dim, rank, rng);
    let m = &g * g.adjoint();
    let trace = m.trace().re;
    DensityMatrix::new(m.unscale(trace))
}

/// Seed-addressed dispatcher over the samplers above.
pub fn sample_random(kind: RandomKind, dim: usize, seed: u64) -> Result<Sample> {
    if dim == 0 {
        return Err(Error::BadDimension { dim, min: 1 });
    }
    let mut rng = seeded_rng(seed);
    Ok(match kind {
        RandomKind::HaarPure => Sample::Pure(haar_pure(dim, &mut rng)),
        RandomKind::GinibreMixed => Sample::Mixed(ginibre_mixed(dim, &mut rng)),
        RandomKind::HaarUnitary => Sample::Unitary(haar_unitary(dim, &mut rng)),
        RandomKind::RankLimited(r) => Sample::Mixed(rank_limited_mixed(dim, r, &mut rng)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;

    #[test]
    fn samplers_are_deterministic_per_seed() {
        let a = sample_random(RandomKind::GinibreMixed, 3, 42).unwrap();
        let b = sample_random(RandomKind::GinibreMixed, 3, 42).unwrap();
        match (a, b) {
            (Sample::Mixed(x), Sample::Mixed(y)) => {
                assert_eq!(x.matrix(), y.matrix());
            }
            _ => panic!("wrong sample kinds"),
        }
    }

    #[test]
    fn sampled_outputs_satisfy_type_invariants() {
        for seed in 0..20 {
            let mut rng = seeded_rng(seed);
            let psi = haar_pure(2, &mut rng);
            assert!((psi.amplitudes().norm_squared() - 1.0).abs() <= 1e-12);

            let rho = ginibre_mixed(3, &mut rng);
            // Construction already validated: Hermitian, trace 1, PSD.
            assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-12);
            // diag(rho) is a valid probability vector.
            let _ = rho.diagonal_probs();

            let u = haar_unitary(4, &mut rng);
            assert!(unitarity_residual(&u) <= 1e-10);
        }
    }

    #[test]
    fn rank_limited_has_requested_rank() {
        let mut rng = seeded_rng(9);
        let rho = rank_limited_mixed(4, 2, &mut rng).unwrap();
        assert_eq!(crate::state::numerical_rank(&rho), 2);
        assert!(matches!(
            rank_limited_mixed(2, 3, &mut rng),
            Err(Error::BadRank { .. })
        ));
    }

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = seeded_rng(21);
        let v = haar_isometry(9, 3, &mut rng);
        let gram = v.adjoint() * &v;
        let err = crate::linalg::max_abs_diff(&gram, &CMatrix::identity(3, 3));
        assert!(err <= 1e-12);
    }
}
