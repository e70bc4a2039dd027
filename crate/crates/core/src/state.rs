//! Quantum states and the primitive operations on them.
//!
//! All uncertainty quantities downstream are functions of the diagonal of a
//! [`DensityMatrix`] in the fixed reference (computational) basis. A change
//! of measurement basis is expressed by conjugating the state before calling
//! any measure, never by reparametrizing the measure itself.

use crate::linalg::{
    hermitian_asymmetry, hermitian_eigen, max_abs_diff, rebuild_from_eigen, C64, CMatrix, CVector,
};
use crate::error::{Error, Result};
use crate::{tol_struct, TOL_RANK};

/// d x d complex, Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity against `tol_struct()`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::new_with_tol(mat, tol_struct())
    }

    pub fn new_with_tol(mat: CMatrix, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let asym = hermitian_asymmetry(&mat);
        if asym > tol {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
                tol,
            });
        }
        let trace_dev = (mat.trace() - C64::new(1.0, 0.0)).norm();
        if trace_dev > tol {
            return Err(Error::TraceNotOne {
                deviation: trace_dev,
                tol,
            });
        }
        let (values, _) = hermitian_eigen(&mat, tol)?;
        let min = values.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
                tol,
            });
        }
        Ok(Self {
            dim: mat.nrows(),
            mat,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Real diagonal entry.
    pub fn prob(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    /// The measurement statistics (rho_00, ..., rho_{d-1,d-1}).
    pub fn diagonal_probs(&self) -> ProbabilityVector {
        ProbabilityVector::new((0..self.dim).map(|i| self.prob(i)).collect())
            .expect("diagonal of a density matrix is a probability vector")
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = CMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Self { dim, mat }
    }

    /// The certain state |i><i|.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(i, i)] = C64::new(1.0, 0.0);
        Self { dim, mat }
    }

    /// Eigenvalues (descending) and eigenvectors, with the crate-wide
    /// phase convention.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.mat, tol_struct()).expect("validated density matrix is Hermitian")
    }

    /// Tr(rho^2), the purity.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Unit-norm amplitude vector |psi> = sum_i psi_i |i>.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    pub fn new(amps: CVector) -> Result<Self> {
        let dev = (amps.norm_squared() - 1.0).abs();
        if dev > tol_struct() {
            return Err(Error::NotNormalized {
                deviation: dev,
                tol: tol_struct(),
            });
        }
        Ok(Self { amps })
    }

    /// Normalizes then wraps; errors only on the zero vector.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm <= 0.0 {
            return Err(Error::NotNormalized {
                deviation: 1.0,
                tol: tol_struct(),
            });
        }
        Ok(Self {
            amps: amps.unscale(norm),
        })
    }

    pub fn basis_state(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut amps = CVector::zeros(dim);
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// (1/sqrt(d)) sum_i |i>, the maximally coherent state.
    pub fn uniform_superposition(dim: usize) -> Self {
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            amps: CVector::from_element(dim, C64::new(a, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// |psi><psi|.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            dim: self.dim(),
            mat: &self.amps * self.amps.adjoint(),
        }
    }

    /// (|psi_0|^2, ..., |psi_{d-1}|^2).
    pub fn probs(&self) -> ProbabilityVector {
        ProbabilityVector::new(self.amps.iter().map(|z| z.norm_sqr()).collect())
            .expect("squared amplitudes of a unit vector sum to 1")
    }
}

/// Point on the probability simplex; entries in [-tol, 0) are clamped to 0
/// at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        let tol = tol_struct();
        for p in probs.iter_mut() {
            if *p < 0.0 {
                if *p < -tol {
                    return Err(Error::NotAProbabilityVector {
                        deviation: -*p,
                        tol,
                    });
                }
                *p = 0.0;
            }
        }
        let dev = (probs.iter().sum::<f64>() - 1.0).abs();
        if dev > tol {
            return Err(Error::NotAProbabilityVector { deviation: dev, tol });
        }
        Ok(Self { probs })
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Which subsystem [`partial_trace`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Hermitian eigendecomposition with descending eigenvalues; see
/// [`hermitian_eigen`] for the phase convention.
pub fn eigendecompose(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    hermitian_eigen(m, tol_struct())
}

/// Positive square root of rho.
pub fn matrix_sqrt(rho: &DensityMatrix) -> Result<CMatrix> {
    let (values, vectors) = rho.eigen();
    let min = values.last().copied().unwrap_or(0.0);
    if min < -tol_struct() {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
            tol: tol_struct(),
        });
    }
    Ok(rebuild_from_eigen(&values, &vectors, |x| x.max(0.0).sqrt()))
}

/// Uhlmann fidelity F(rho, sigma) = [Tr (sqrt(rho) sigma sqrt(rho))^(1/2)]^2.
///
/// Evaluated as the squared nuclear norm of sqrt(rho) sqrt(sigma): the
/// singular values carry only additive roundoff, where eigenvalues of the
/// sandwiched product would put eigensolver noise under a square root.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let a = matrix_sqrt(rho)?;
    let b = matrix_sqrt(sigma)?;
    Ok(fidelity_from_roots(&a, &b).clamp(0.0, 1.0))
}

/// (sum of singular values of sqrt_rho * sqrt_sigma)^2, unclamped.
pub fn fidelity_from_roots(sqrt_rho: &CMatrix, sqrt_sigma: &CMatrix) -> f64 {
    let product = sqrt_rho * sqrt_sigma;
    let sv = product.svd(false, false).singular_values;
    let nuclear: f64 = sv.iter().sum();
    nuclear * nuclear
}

/// Removes all off-diagonal entries: Pi(rho) = sum_i rho_ii |i><i|.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let mut mat = CMatrix::zeros(d, d);
    for i in 0..d {
        mat[(i, i)] = C64::new(rho.prob(i).max(0.0), 0.0);
    }
    DensityMatrix { dim: d, mat }
}

/// Traces out one tensor factor of a state on dims.0 x dims.1.
pub fn partial_trace(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
    keep: Keep,
) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da * db != rho_ab.dim() || da == 0 || db == 0 {
        return Err(Error::BadFactorization {
            dim: rho_ab.dim(),
            d_a: da,
            d_b: db,
        });
    }
    let m = rho_ab.matrix();
    let mat = match keep {
        Keep::A => CMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
        }),
        Keep::B => CMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
        }),
    };
    DensityMatrix::new(mat)
}

/// A purification of rho on dim x rank, with the ancilla in the Schmidt basis.
///
/// Tracing out the ancilla (subsystem B of size = numerical rank) recovers rho.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let (values, vectors) = rho.eigen();
    let kept: Vec<(usize, f64)> = values
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > TOL_RANK)
        .collect();
    let rank = kept.len().max(1);
    let d = rho.dim();
    let mut amps = CVector::zeros(d * rank);
    for (slot, &(j, lambda)) in kept.iter().enumerate() {
        let w = lambda.sqrt();
        for i in 0..d {
            amps[i * rank + slot] = vectors[(i, j)].scale(w);
        }
    }
    PureState::normalized(amps).expect("purification has positive norm")
}

/// Numerical rank: eigenvalues above `TOL_RANK`.
pub fn numerical_rank(rho: &DensityMatrix) -> usize {
    let (values, _) = rho.eigen();
    values.iter().filter(|&&v| v > TOL_RANK).count().max(1)
}

/// U rho U'.
pub fn conjugate(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            got: u.nrows(),
        });
    }
    DensityMatrix::new(u * rho.matrix() * u.adjoint())
}

/// Qubit from Bloch coordinates: rho = (I + x sx + y sy + z sz)/2.
/// Valid exactly when x^2 + y^2 + z^2 <= 1 (within tolerance).
pub fn from_bloch_vector(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    let mat = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        ],
    );
    DensityMatrix::new(mat)
}

/// rho1 (x) rho2.
pub fn tensor(rho1: &DensityMatrix, rho2: &DensityMatrix) -> DensityMatrix {
    DensityMatrix {
        dim: rho1.dim() * rho2.dim(),
        mat: rho1.matrix().kronecker(rho2.matrix()),
    }
}

/// Max-norm distance between two states.
pub fn state_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    max_abs_diff(a.matrix(), b.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn plus_state() -> PureState {
        PureState::uniform_superposition(2)
    }

    #[test]
    fn density_matrix_rejects_bad_inputs() {
        // Non-Hermitian.
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        // Wrong trace.
        let m = CMatrix::identity(2, 2);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::TraceNotOne { .. })
        ));
        // Indefinite.
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn matrix_sqrt_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(2);
        let s = matrix_sqrt(&rho).unwrap();
        let expected = CMatrix::identity(2, 2).scale(1.0 / 2.0_f64.sqrt());
        assert!(max_abs_diff(&s, &expected) <= 1e-12);
    }

    #[test]
    fn matrix_sqrt_of_projector_is_itself() {
        let rho = DensityMatrix::basis_projector(2, 0);
        let s = matrix_sqrt(&rho).unwrap();
        assert!(max_abs_diff(&s, rho.matrix()) <= 1e-12);
    }

    #[test]
    fn matrix_sqrt_squares_back() {
        // Oracle for the random rank-2 qutrit case: square the result.
        let mut rng = crate::random::seeded_rng(7);
        let rho = crate::random::rank_limited_mixed(3, 2, &mut rng).unwrap();
        let s = matrix_sqrt(&rho).unwrap();
        assert!(hermitian_asymmetry(&s) <= 1e-10);
        assert!(max_abs_diff(&(&s * &s), rho.matrix()) <= 1e-9);
    }

    #[test]
    fn fidelity_against_basis_projector_is_the_diagonal_entry() {
        let mut rng = crate::random::seeded_rng(11);
        for d in 2..=4 {
            let rho = crate::random::ginibre_mixed(d, &mut rng);
            for i in 0..d {
                let f = fidelity(&rho, &DensityMatrix::basis_projector(d, i)).unwrap();
                assert!(
                    (f - rho.prob(i)).abs() <= 1e-10,
                    "d={d} i={i}: {f} vs {}",
                    rho.prob(i)
                );
            }
        }
    }

    #[test]
    fn fidelity_special_values() {
        let zero = DensityMatrix::basis_projector(2, 0);
        let one = DensityMatrix::basis_projector(2, 1);
        assert!(fidelity(&zero, &one).unwrap() <= 1e-12);

        let plus = plus_state().density();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&mixed, &plus).unwrap() - 0.5).abs() <= 1e-10);
        assert!((fidelity(&plus, &plus).unwrap() - 1.0).abs() <= 1e-9);

        // Symmetry.
        let mut rng = crate::random::seeded_rng(3);
        let a = crate::random::ginibre_mixed(3, &mut rng);
        let b = crate::random::ginibre_mixed(3, &mut rng);
        let fab = fidelity(&a, &b).unwrap();
        let fba = fidelity(&b, &a).unwrap();
        assert!((fab - fba).abs() <= 1e-8);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(3);
        assert!(matches!(fidelity(&a, &b), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn dephase_plus_gives_maximally_mixed() {
        let out = dephase(&plus_state().density());
        assert!(state_distance(&out, &DensityMatrix::maximally_mixed(2)) <= 1e-12);
    }

    #[test]
    fn dephase_fixes_diagonal_states_and_is_idempotent() {
        let mut rng = crate::random::seeded_rng(5);
        let rho = crate::random::ginibre_mixed(3, &mut rng);
        let once = dephase(&rho);
        let twice = dephase(&once);
        assert!(state_distance(&once, &twice) <= 1e-15);
        // Elementwise oracle: off-diagonals zero, diagonal preserved.
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j {
                    rho.matrix()[(i, i)].re
                } else {
                    0.0
                };
                assert!((once.matrix()[(i, j)] - C64::new(expect, 0.0)).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = crate::random::seeded_rng(13);
        let r1 = crate::random::ginibre_mixed(2, &mut rng);
        let r2 = crate::random::ginibre_mixed(3, &mut rng);
        let joint = tensor(&r1, &r2);
        let back_a = partial_trace(&joint, (2, 3), Keep::A).unwrap();
        let back_b = partial_trace(&joint, (2, 3), Keep::B).unwrap();
        assert!(state_distance(&back_a, &r1) <= 1e-10);
        assert!(state_distance(&back_b, &r2) <= 1e-10);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let mut amps = CVector::zeros(4);
        let inv = 1.0 / 2.0_f64.sqrt();
        amps[0] = C64::new(inv, 0.0); // |00>
        amps[3] = C64::new(inv, 0.0); // |11>
        let bell = PureState::new(amps).unwrap().density();
        let reduced = partial_trace(&bell, (2, 2), Keep::A).unwrap();
        assert!(state_distance(&reduced, &DensityMatrix::maximally_mixed(2)) <= 1e-12);
    }

    #[test]
    fn partial_trace_matches_loop_oracle() {
        // Independent index-summation over a random 2x3 state.
        let mut rng = crate::random::seeded_rng(17);
        let rho = crate::random::ginibre_mixed(6, &mut rng);
        let kept = partial_trace(&rho, (2, 3), Keep::A).unwrap();
        let m = rho.matrix();
        for a in 0..2 {
            for a2 in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..3 {
                    acc += m[(a * 3 + b, a2 * 3 + b)];
                }
                assert!((kept.matrix()[(a, a2)] - acc).norm() <= 1e-13);
            }
        }
        assert!(matches!(
            partial_trace(&rho, (4, 2), Keep::A),
            Err(Error::BadFactorization { .. })
        ));
    }

    #[test]
    fn purify_roundtrips_through_partial_trace() {
        let mut rng = crate::random::seeded_rng(19);
        for d in 2..=4 {
            let rho = crate::random::ginibre_mixed(d, &mut rng);
            let psi = purify(&rho);
            let r = psi.dim() / d;
            let back = partial_trace(&psi.density(), (d, r), Keep::A).unwrap();
            assert!(state_distance(&back, &rho) <= 1e-9, "d={d}");
        }
    }

    #[test]
    fn purify_pure_input_appends_trivial_ancilla() {
        let psi = plus_state();
        let purified = purify(&psi.density());
        assert_eq!(purified.dim(), 2);
        let overlap = psi.amplitudes().dotc(purified.amplitudes()).norm();
        assert!((overlap - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn purify_maximally_mixed_is_maximally_entangled() {
        let psi = purify(&DensityMatrix::maximally_mixed(2));
        assert_eq!(psi.dim(), 4);
        let reduced = partial_trace(&psi.density(), (2, 2), Keep::B).unwrap();
        assert!(state_distance(&reduced, &DensityMatrix::maximally_mixed(2)) <= 1e-10);
    }

    #[test]
    fn probability_vector_clamps_and_validates() {
        let p = ProbabilityVector::new(vec![1.0 + 5e-10, -5e-10]).unwrap();
        assert_eq!(p.as_slice()[1], 0.0);
        assert!(ProbabilityVector::new(vec![0.5, 0.2]).is_err());
        assert!(ProbabilityVector::new(vec![1.2, -0.2]).is_err());
    }
}
