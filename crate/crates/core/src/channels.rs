//! Kraus channels, certainty predicates, and the twirling constructions.
//!
//! A channel is *certain* when it maps every certain state |i><i| to a
//! certain state; the predicate here is behavioral (test the d images), with
//! the Kraus-form structure extracted afterwards as evidence. A channel is
//! *uncertainty preserving* exactly when its Kraus operators factor as
//! D_l P_pi for one shared permutation pi and diagonal D_l; that predicate is
//! structural, with a randomized spot-check of U-invariance layered on top.

use serde::Serialize;

use crate::assist::PureStateEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, C64, CMatrix, CVector};
use crate::measures::{uncertainty, SymmetricConcaveFn};
use crate::random::{ginibre_mixed, haar_isometry, haar_unitary, seeded_rng};
use crate::state::{DensityMatrix, PureState};
use crate::tol_struct;
use rand::seq::SliceRandom;
use rand::Rng;

/// Trace-preserving channel in Kraus form: rho -> sum_l K_l rho K_l'.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates shape agreement and completeness sum K'K = I.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        Self::new_with_tol(ops, tol_struct())
    }

    pub fn new_with_tol(ops: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyChannel)?;
        let dim = first.nrows();
        if first.ncols() != dim {
            return Err(Error::NotSquare {
                rows: first.nrows(),
                cols: first.ncols(),
            });
        }
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: k.nrows().max(k.ncols()),
                });
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let residual = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if residual > tol {
            return Err(Error::NotComplete { residual, tol });
        }
        Ok(Self { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    /// Sequential composition: `other` after `self`, Kraus set {L_m K_l}.
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let ops = other
            .ops
            .iter()
            .flat_map(|l| self.ops.iter().map(move |k| l * k))
            .collect();
        KrausChannel::new(ops)
    }
}

/// Lambda(rho) = sum_l K_l rho K_l'.
pub fn apply(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if channel.dim() != rho.dim() {
        return Err(Error::DimMismatch {
            expected: channel.dim(),
            got: rho.dim(),
        });
    }
    let d = channel.dim();
    let mut out = CMatrix::zeros(d, d);
    for k in channel.operators() {
        out += k * rho.matrix() * k.adjoint();
    }
    DensityMatrix::new(out)
}

/// Theorem-1 evidence: K_l = sum_i sqrt(p_il) e^{i theta_il} |g(i)><i|.
#[derive(Debug, Clone, Serialize)]
pub struct CertainStructure {
    /// Image map: |i><i| -> |g(i)><g(i)|.
    pub g: Vec<usize>,
    /// p_il = ||K_l |i>||^2, indexed `weights[i][l]`.
    pub weights: Vec<Vec<f64>>,
    /// theta_il = arg <g(i)|K_l|i>, indexed `phases[i][l]`.
    pub phases: Vec<Vec<f64>>,
    /// Max-norm gap between the rebuilt Kraus operators and the originals.
    pub reconstruction_residual: f64,
}

/// Theorem-2 evidence: K_l = D_l P_pi.
#[derive(Debug, Clone, Serialize)]
pub struct PreservingStructure {
    /// The shared permutation, as the row map i -> pi(i).
    pub permutation: Vec<usize>,
    /// Diagonal factors D_l, stored as their diagonals.
    pub diagonals: Vec<Vec<C64>>,
    /// Largest Kraus entry found off the permutation pattern.
    pub off_pattern_residual: f64,
}

/// State witnessing that some built-in measure changes under the channel.
#[derive(Debug, Clone, Serialize)]
pub struct UChangeWitness {
    pub state: DensityMatrix,
    pub measure: String,
    pub delta: f64,
}

/// Joint verdict of both predicates, with evidence or counterexamples.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelVerdict {
    pub is_certain: bool,
    pub is_uncertainty_preserving: bool,
    pub certain_structure: Option<CertainStructure>,
    pub preserving_structure: Option<PreservingStructure>,
    /// A certain state whose image is not certain (when `!is_certain`).
    pub counterexample: Option<DensityMatrix>,
    /// A state whose uncertainty the channel changes (when certain but not
    /// preserving, or whenever one is found for a rejected channel).
    pub u_change_witness: Option<UChangeWitness>,
}

const SPOT_CHECK_SEED: u64 = 0x7E57_0001;
const SPOT_CHECK_STATES: usize = 20;
const WITNESS_SEARCH_STATES: usize = 50;
const STRUCTURE_TOL: f64 = 1e-8;

/// Behavioral Theorem-1 predicate: images of all certain states stay certain.
/// The full verdict (including the Theorem-2 side) is returned.
pub fn is_certain_operation(channel: &KrausChannel, tol: f64) -> ChannelVerdict {
    compute_verdict(channel, tol)
}

/// Structural Theorem-2 predicate: one permutation carries every Kraus
/// operator, diagonal factors complete to identity, and a seeded spot check
/// confirms U-invariance. The full verdict is returned.
pub fn is_uncertainty_preserving(channel: &KrausChannel, tol: f64) -> ChannelVerdict {
    compute_verdict(channel, tol)
}

fn compute_verdict(channel: &KrausChannel, tol: f64) -> ChannelVerdict {
    let d = channel.dim();
    let mut verdict = ChannelVerdict {
        is_certain: true,
        is_uncertainty_preserving: false,
        certain_structure: None,
        preserving_structure: None,
        counterexample: None,
        u_change_witness: None,
    };

    // --- certainty: behavioral test of the d images ---
    let mut g = vec![0usize; d];
    for i in 0..d {
        let input = DensityMatrix::basis_projector(d, i);
        let image = apply(channel, &input).expect("dimensions match");
        let (values, vectors) = image.eigen();
        let top = values[0];
        let overlap_sq: Vec<f64> = (0..d).map(|r| vectors[(r, 0)].norm_sqr()).collect();
        let (j, &best) = overlap_sq
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        if top < 1.0 - tol || best < 1.0 - tol {
            verdict.is_certain = false;
            verdict.counterexample = Some(input);
            break;
        }
        g[i] = j;
    }

    if verdict.is_certain {
        verdict.certain_structure = extract_certain_structure(channel, &g);
    }

    // --- preservation: structural factorization K_l = D_l P_pi ---
    let structural = extract_preserving_structure(channel, tol);
    let spot_ok = structural
        .as_ref()
        .map(|_| spot_check_preserves_uncertainty(channel))
        .unwrap_or(false);
    verdict.is_uncertainty_preserving = verdict.is_certain && structural.is_some() && spot_ok;
    verdict.preserving_structure = structural;

    if !verdict.is_uncertainty_preserving {
        verdict.u_change_witness = find_u_change_witness(channel);
    }
    verdict
}

fn extract_certain_structure(channel: &KrausChannel, g: &[usize]) -> Option<CertainStructure> {
    let d = channel.dim();
    let n_ops = channel.operators().len();
    // u[i][l] = <g(i)|K_l|i> carries both the weight and the phase.
    let mut amp = vec![vec![C64::new(0.0, 0.0); n_ops]; d];
    let mut weights = vec![vec![0.0; n_ops]; d];
    let mut phases = vec![vec![0.0; n_ops]; d];
    for (l, k) in channel.operators().iter().enumerate() {
        for i in 0..d {
            let a = k[(g[i], i)];
            amp[i][l] = a;
            weights[i][l] = (0..d).map(|r| k[(r, i)].norm_sqr()).sum();
            phases[i][l] = if a.norm() > 0.0 { a.arg() } else { 0.0 };
        }
    }
    // Theorem-1 constraints: unit weight rows and cross-term cancellation
    // within classes sharing an image.
    for i in 0..d {
        let total: f64 = weights[i].iter().sum();
        if (total - 1.0).abs() > STRUCTURE_TOL {
            return None;
        }
        for i2 in 0..i {
            if g[i] == g[i2] {
                let cross: C64 = (0..n_ops).map(|l| amp[i][l] * amp[i2][l].conj()).sum();
                if cross.norm() > STRUCTURE_TOL {
                    return None;
                }
            }
        }
    }
    // Rebuild and compare.
    let mut residual = 0.0_f64;
    for (l, k) in channel.operators().iter().enumerate() {
        let rebuilt = CMatrix::from_fn(d, d, |r, c| {
            if r == g[c] {
                amp[c][l]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        residual = residual.max(max_abs_diff(&rebuilt, k));
    }
    if residual > STRUCTURE_TOL {
        return None;
    }
    Some(CertainStructure {
        g: g.to_vec(),
        weights,
        phases,
        reconstruction_residual: residual,
    })
}

fn extract_preserving_structure(channel: &KrausChannel, tol: f64) -> Option<PreservingStructure> {
    let d = channel.dim();
    // Union support pattern, column by column. Each column's total mass is 1
    // by completeness, so an all-zero column cannot occur.
    let mut pi = vec![0usize; d];
    for c in 0..d {
        let mut best_row = 0;
        let mut best_mass = -1.0;
        for r in 0..d {
            let mass: f64 = channel
                .operators()
                .iter()
                .map(|k| k[(r, c)].norm_sqr())
                .sum();
            if mass > best_mass {
                best_mass = mass;
                best_row = r;
            }
        }
        pi[c] = best_row;
    }
    // pi must be a permutation.
    let mut seen = vec![false; d];
    for &r in &pi {
        if seen[r] {
            return None;
        }
        seen[r] = true;
    }
    // All off-pattern entries must vanish.
    let mut off_pattern = 0.0_f64;
    for k in channel.operators() {
        for c in 0..d {
            for r in 0..d {
                if r != pi[c] {
                    off_pattern = off_pattern.max(k[(r, c)].norm());
                }
            }
        }
    }
    if off_pattern > tol {
        return None;
    }
    // Diagonal factors, and their completeness sum_l D_l' D_l = I.
    let diagonals: Vec<Vec<C64>> = channel
        .operators()
        .iter()
        .map(|k| {
            let mut diag = vec![C64::new(0.0, 0.0); d];
            for c in 0..d {
                diag[pi[c]] = k[(pi[c], c)];
            }
            diag
        })
        .collect();
    for r in 0..d {
        let mass: f64 = diagonals.iter().map(|diag| diag[r].norm_sqr()).sum();
        if (mass - 1.0).abs() > tol.max(1e-12) {
            return None;
        }
    }
    Some(PreservingStructure {
        permutation: pi,
        diagonals,
        off_pattern_residual: off_pattern,
    })
}

fn spot_check_preserves_uncertainty(channel: &KrausChannel) -> bool {
    let d = channel.dim();
    let mut rng = seeded_rng(SPOT_CHECK_SEED);
    let measures = SymmetricConcaveFn::all_builtins(2.0);
    for _ in 0..SPOT_CHECK_STATES {
        let rho = ginibre_mixed(d, &mut rng);
        let image = apply(channel, &rho).expect("dimensions match");
        for f in &measures {
            if (uncertainty(f, &image) - uncertainty(f, &rho)).abs() > 1e-8 {
                return false;
            }
        }
    }
    true
}

fn find_u_change_witness(channel: &KrausChannel) -> Option<UChangeWitness> {
    let d = channel.dim();
    let measures = SymmetricConcaveFn::all_builtins(2.0);
    let mut best: Option<UChangeWitness> = None;
    let consider = |rho: DensityMatrix, channel: &KrausChannel| -> Option<UChangeWitness> {
        let image = apply(channel, &rho).ok()?;
        let mut top: Option<(String, f64)> = None;
        for f in &measures {
            let delta = (uncertainty(f, &image) - uncertainty(f, &rho)).abs();
            if top.as_ref().map(|(_, b)| delta > *b).unwrap_or(true) {
                top = Some((f.name().to_string(), delta));
            }
        }
        let (measure, delta) = top?;
        (delta >= 1e-6).then(|| UChangeWitness {
            state: rho,
            measure,
            delta,
        })
    };
    for i in 0..d {
        if let Some(w) = consider(DensityMatrix::basis_projector(d, i), channel) {
            return Some(w);
        }
    }
    let mut rng = seeded_rng(SPOT_CHECK_SEED ^ 0xFF);
    for _ in 0..WITNESS_SEARCH_STATES {
        if let Some(w) = consider(ginibre_mixed(d, &mut rng), channel) {
            if best.is_none() {
                best = Some(w);
                break;
            }
        }
    }
    best
}

/// The dephasing channel with Kraus set {|i><i|}.
pub fn dephasing_channel(dim: usize) -> KrausChannel {
    let ops = (0..dim)
        .map(|i| {
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, i)] = C64::new(1.0, 0.0);
            m
        })
        .collect();
    KrausChannel::new(ops).expect("projectors complete to identity")
}

/// Single-Kraus permutation channel P_pi = sum_i |pi(i)><i|.
pub fn permutation_channel(pi: &[usize]) -> Result<KrausChannel> {
    let d = pi.len();
    let mut seen = vec![false; d];
    for &r in pi {
        if r >= d || seen[r] {
            return Err(Error::BadDimension { dim: r, min: 0 });
        }
        seen[r] = true;
    }
    let mut m = CMatrix::zeros(d, d);
    for (i, &r) in pi.iter().enumerate() {
        m[(r, i)] = C64::new(1.0, 0.0);
    }
    KrausChannel::new(vec![m])
}

/// Single-Kraus unitary channel rho -> U rho U'.
pub fn unitary_channel(u: &CMatrix) -> Result<KrausChannel> {
    KrausChannel::new(vec![u.clone()])
}

/// The cyclic-shift twirl Lambda_1 = (1/d) sum_t Q^t rho (Q^t)'; its output
/// has every diagonal entry exactly 1/d.
pub fn uniform_diagonal_twirl(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let m = rho.matrix();
    let scale = 1.0 / d as f64;
    let out = CMatrix::from_fn(d, d, |a, b| {
        (1..=d)
            .map(|t| m[((a + t) % d, (b + t) % d)])
            .sum::<C64>()
            .scale(scale)
    });
    DensityMatrix::new(out).expect("average of unitary conjugations is a state")
}

/// The twirl as an explicit Kraus channel {Q^t / sqrt(d)}.
pub fn twirl_channel(dim: usize) -> KrausChannel {
    let scale = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let ops = (1..=dim)
        .map(|t| {
            let mut m = CMatrix::zeros(dim, dim);
            for i in 0..dim {
                m[(i, (i + t) % dim)] = scale;
            }
            m
        })
        .collect();
    KrausChannel::new(ops).expect("shift operators complete to identity")
}

/// Equal-weight Fourier decomposition of I/d into maximally coherent pure
/// states |phi_k> = (1/sqrt(d)) sum_j omega^{jk} |j>.
pub fn max_coherent_decomposition_of_uniform(dim: usize) -> Result<PureStateEnsemble> {
    if dim < 2 {
        return Err(Error::BadDimension { dim, min: 2 });
    }
    let weight = 1.0 / dim as f64;
    let amp = 1.0 / (dim as f64).sqrt();
    let members = (0..dim)
        .map(|k| {
            let amps = CVector::from_fn(dim, |j, _| {
                C64::from_polar(
                    amp,
                    2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64,
                )
            });
            PureState::new(amps).map(|psi| (weight, psi))
        })
        .collect::<Result<Vec<_>>>()?;
    PureStateEnsemble::new(dim, members)
}

/// Output of [`constant_diagonal_unitary`].
#[derive(Debug, Clone)]
pub struct ConstantDiagonalResult {
    pub unitary: CMatrix,
    /// U' rho U, with every diagonal entry 1/d.
    pub conjugated: DensityMatrix,
    pub rotations: usize,
}

/// Finds U with U' rho U of constant diagonal 1/d by at most d-1 Givens
/// rotations, each pinning the current max-diagonal index to 1/d exactly
/// (pivot: i = argmax, j = argmin of the running diagonal).
pub fn constant_diagonal_unitary(rho: &DensityMatrix) -> ConstantDiagonalResult {
    let d = rho.dim();
    let target = 1.0 / d as f64;
    let mut a = rho.matrix().clone();
    let mut u = CMatrix::identity(d, d);
    let mut rotations = 0;

    for _ in 0..d.saturating_sub(1) {
        let diag: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
        let max_dev = diag.iter().map(|&x| (x - target).abs()).fold(0.0, f64::max);
        if max_dev <= 1e-12 {
            break;
        }
        let i = (0..d)
            .max_by(|&p, &q| diag[p].total_cmp(&diag[q]))
            .expect("nonempty");
        let j = (0..d)
            .min_by(|&p, &q| diag[p].total_cmp(&diag[q]))
            .expect("nonempty");

        let aii = diag[i];
        let ajj = diag[j];
        let b = a[(i, j)];
        let b_mag = b.norm();
        let phi = if b_mag > 0.0 { b.arg() } else { 0.0 };
        // Solve (aii-ajj)/2 cos(2t) + |b| sin(2t) = target - (aii+ajj)/2;
        // a solution exists because target lies between ajj and aii.
        let a0 = (aii - ajj) / 2.0;
        let c0 = target - (aii + ajj) / 2.0;
        let radius = (a0 * a0 + b_mag * b_mag).sqrt();
        let two_theta = b_mag.atan2(a0) + (c0 / radius).clamp(-1.0, 1.0).acos();
        let (ct, st) = ((two_theta / 2.0).cos(), (two_theta / 2.0).sin());

        let mut g = CMatrix::identity(d, d);
        g[(i, i)] = C64::new(ct, 0.0);
        g[(i, j)] = -C64::from_polar(st, phi);
        g[(j, i)] = C64::from_polar(st, -phi);
        g[(j, j)] = C64::new(ct, 0.0);

        a = g.adjoint() * a * &g;
        u *= &g;
        rotations += 1;
    }

    let conjugated =
        DensityMatrix::new(a).expect("unitary conjugation preserves state invariants");
    ConstantDiagonalResult {
        unitary: u,
        conjugated,
        rotations,
    }
}

/// Samples a channel from the Theorem-1 family: a random image map g and,
/// per class of indices sharing an image, orthonormal amplitude vectors in
/// the Kraus index. Completeness holds by construction. Returns the channel
/// and the map g.
pub fn sample_certain_channel(dim: usize, rng: &mut impl Rng) -> (KrausChannel, Vec<usize>) {
    // Half the time a permutation, half the time an arbitrary map.
    let g: Vec<usize> = if rng.random::<bool>() {
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(rng);
        perm
    } else {
        (0..dim).map(|_| rng.random_range(0..dim)).collect()
    };
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for (i, &target) in g.iter().enumerate() {
        classes[target].push(i);
    }
    let max_class = classes.iter().map(Vec::len).max().unwrap_or(1);
    let n_ops = (max_class + 1).max(2);

    let mut amp = vec![vec![C64::new(0.0, 0.0); n_ops]; dim];
    for members in classes.iter().filter(|c| !c.is_empty()) {
        let iso = haar_isometry(n_ops, members.len(), rng);
        for (col, &i) in members.iter().enumerate() {
            for l in 0..n_ops {
                amp[i][l] = iso[(l, col)];
            }
        }
    }
    let ops: Vec<CMatrix> = (0..n_ops)
        .map(|l| {
            CMatrix::from_fn(dim, dim, |r, c| {
                if r == g[c] {
                    amp[c][l]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    (
        KrausChannel::new(ops).expect("construction is complete by orthonormality"),
        g,
    )
}

/// Samples a Theorem-2 channel K_l = D_l P_pi with random permutation and
/// diagonals completing to identity. Returns the channel and pi.
pub fn sample_preserving_channel(
    dim: usize,
    n_ops: usize,
    rng: &mut impl Rng,
) -> (KrausChannel, Vec<usize>) {
    let n_ops = n_ops.max(1);
    let mut pi: Vec<usize> = (0..dim).collect();
    pi.shuffle(rng);
    // One Haar unit vector in C^L per output row.
    let rows: Vec<Vec<C64>> = (0..dim)
        .map(|_| {
            let v = haar_isometry(n_ops, 1, rng);
            (0..n_ops).map(|l| v[(l, 0)]).collect()
        })
        .collect();
    let ops: Vec<CMatrix> = (0..n_ops)
        .map(|l| {
            CMatrix::from_fn(dim, dim, |r, c| {
                if r == pi[c] {
                    rows[r][l]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    (
        KrausChannel::new(ops).expect("row vectors are unit norm"),
        pi,
    )
}

/// Samples a generic CPTP map by restricting a Haar unitary on system x
/// environment (Stinespring dilation with `env_dim` Kraus operators).
pub fn sample_stinespring_channel(dim: usize, env_dim: usize, rng: &mut impl Rng) -> KrausChannel {
    let env = env_dim.max(1);
    let big = haar_unitary(dim * env, rng);
    let ops: Vec<CMatrix> = (0..env)
        .map(|l| CMatrix::from_fn(dim, dim, |r, c| big[(r * env + l, c * env)]))
        .collect();
    KrausChannel::new(ops).expect("isometry restriction is complete")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::is_maximally_uncertain;
    use crate::state::{conjugate, dephase, state_distance};

    fn qubit_collapse_channel() -> KrausChannel {
        // K1 = |0><0|, K2 = |0><1|.
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 0)] = C64::new(1.0, 0.0);
        let mut k2 = CMatrix::zeros(2, 2);
        k2[(0, 1)] = C64::new(1.0, 0.0);
        KrausChannel::new(vec![k1, k2]).unwrap()
    }

    fn hadamard() -> CMatrix {
        let h = 1.0 / 2.0_f64.sqrt();
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(h, 0.0),
                C64::new(h, 0.0),
                C64::new(h, 0.0),
                C64::new(-h, 0.0),
            ],
        )
    }

    #[test]
    fn apply_dephasing_matches_dephase() {
        let mut rng = seeded_rng(79);
        let rho = ginibre_mixed(3, &mut rng);
        let out = apply(&dephasing_channel(3), &rho).unwrap();
        assert!(state_distance(&out, &dephase(&rho)) <= 1e-12);
    }

    #[test]
    fn apply_collapse_channel_sends_one_to_zero() {
        let out = apply(&qubit_collapse_channel(), &DensityMatrix::basis_projector(2, 1)).unwrap();
        assert!(state_distance(&out, &DensityMatrix::basis_projector(2, 0)) <= 1e-12);
    }

    #[test]
    fn apply_unitary_channel_matches_conjugation_oracle() {
        let mut rng = seeded_rng(83);
        let rho = ginibre_mixed(3, &mut rng);
        let u = haar_unitary(3, &mut rng);
        let via_channel = apply(&unitary_channel(&u).unwrap(), &rho).unwrap();
        let direct = conjugate(&rho, &u).unwrap();
        assert!(state_distance(&via_channel, &direct) <= 1e-12);
    }

    #[test]
    fn channel_rejects_incomplete_kraus() {
        let mut k = CMatrix::zeros(2, 2);
        k[(0, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(
            KrausChannel::new(vec![k]),
            Err(Error::NotComplete { .. })
        ));
        assert!(matches!(KrausChannel::new(vec![]), Err(Error::EmptyChannel)));
    }

    #[test]
    fn permutation_channel_is_certain_with_matching_map() {
        let v = is_certain_operation(&permutation_channel(&[2, 0, 1]).unwrap(), 1e-8);
        assert!(v.is_certain);
        let s = v.certain_structure.expect("structure extracted");
        assert_eq!(s.g, vec![2, 0, 1]);
        assert!(s.reconstruction_residual <= 1e-12);
        // A permutation is also uncertainty preserving.
        assert!(v.is_uncertainty_preserving);
    }

    #[test]
    fn collapse_channel_is_certain_but_not_preserving() {
        let v = is_certain_operation(&qubit_collapse_channel(), 1e-8);
        assert!(v.is_certain);
        assert_eq!(v.certain_structure.as_ref().unwrap().g, vec![0, 0]);
        assert!(!v.is_uncertainty_preserving);
        // It maps diag(a, 1-a) to |0><0|, changing U; a witness must exist.
        let w = v.u_change_witness.expect("witness found");
        assert!(w.delta >= 1e-6);
    }

    #[test]
    fn hadamard_channel_is_not_certain() {
        let v = is_certain_operation(&unitary_channel(&hadamard()).unwrap(), 1e-8);
        assert!(!v.is_certain);
        let ce = v.counterexample.expect("counterexample reported");
        // The image of the counterexample really is uncertain.
        let img = apply(&unitary_channel(&hadamard()).unwrap(), &ce).unwrap();
        let top_diag = (0..2).map(|i| img.prob(i)).fold(0.0, f64::max);
        assert!(top_diag < 1.0 - 1e-6);
    }

    #[test]
    fn dephasing_is_uncertainty_preserving_with_identity_permutation() {
        let v = is_uncertainty_preserving(&dephasing_channel(3), 1e-8);
        assert!(v.is_uncertainty_preserving);
        let s = v.preserving_structure.expect("structure extracted");
        assert_eq!(s.permutation, vec![0, 1, 2]);
        assert_eq!(s.diagonals.len(), 3);
    }

    #[test]
    fn sampled_families_pass_their_predicates() {
        let mut rng = seeded_rng(89);
        for d in 2..=4 {
            for _ in 0..10 {
                let (ch, g) = sample_certain_channel(d, &mut rng);
                let v = is_certain_operation(&ch, 1e-8);
                assert!(v.is_certain, "sampled certain channel rejected at d={d}");
                assert_eq!(v.certain_structure.expect("structure").g, g);

                let (ch, pi) = sample_preserving_channel(d, 3, &mut rng);
                let v = is_uncertainty_preserving(&ch, 1e-8);
                assert!(v.is_uncertainty_preserving, "sampled D P channel rejected");
                assert_eq!(v.preserving_structure.expect("structure").permutation, pi);
            }
        }
    }

    #[test]
    fn random_channels_are_rejected_with_evidence() {
        let mut rng = seeded_rng(97);
        for _ in 0..10 {
            let ch = sample_stinespring_channel(3, 2, &mut rng);
            let v = is_certain_operation(&ch, 1e-8);
            if v.is_certain {
                // Measure-zero event for Haar channels; structure must then
                // hold exactly.
                assert!(v.certain_structure.is_some());
            } else {
                assert!(v.counterexample.is_some());
            }
            assert!(!v.is_uncertainty_preserving);
        }
    }

    #[test]
    fn composition_of_certain_operations_stays_certain() {
        let mut rng = seeded_rng(101);
        for _ in 0..5 {
            let (a, _) = sample_certain_channel(3, &mut rng);
            let (b, _) = sample_certain_channel(3, &mut rng);
            let composed = a.compose(&b).unwrap();
            assert!(is_certain_operation(&composed, 1e-8).is_certain);
        }
    }

    #[test]
    fn twirl_flattens_the_diagonal() {
        let mut rng = seeded_rng(103);
        for d in 2..=4 {
            let rho = ginibre_mixed(d, &mut rng);
            let out = uniform_diagonal_twirl(&rho);
            for i in 0..d {
                assert!((out.prob(i) - 1.0 / d as f64).abs() <= 1e-9);
            }
            assert!(is_maximally_uncertain(&out, 1e-9));
            // Matches the explicit Kraus-channel route.
            let via_channel = apply(&twirl_channel(d), &rho).unwrap();
            assert!(state_distance(&out, &via_channel) <= 1e-12);
        }
        // |0><0| at d=2 averages to I/2.
        let out = uniform_diagonal_twirl(&DensityMatrix::basis_projector(2, 0));
        assert!(state_distance(&out, &DensityMatrix::maximally_mixed(2)) <= 1e-12);
    }

    #[test]
    fn fourier_ensemble_reconstructs_identity_over_d() {
        for d in 2..=5 {
            let ens = max_coherent_decomposition_of_uniform(d).unwrap();
            let mix = ens.mixture();
            assert!(state_distance(&mix, &DensityMatrix::maximally_mixed(d)) <= 1e-10);
            for (w, psi) in ens.members() {
                assert!((w - 1.0 / d as f64).abs() <= 1e-12);
                for p in psi.probs().as_slice() {
                    assert!((p - 1.0 / d as f64).abs() <= 1e-12);
                }
                assert!(is_maximally_uncertain(&psi.density(), 1e-9));
            }
        }
        assert!(max_coherent_decomposition_of_uniform(1).is_err());
    }

    #[test]
    fn constant_diagonal_on_certain_state() {
        let res = constant_diagonal_unitary(&DensityMatrix::basis_projector(2, 0));
        assert_eq!(res.rotations, 1);
        assert!((res.conjugated.prob(0) - 0.5).abs() <= 1e-12);
        assert!((res.conjugated.prob(1) - 0.5).abs() <= 1e-12);
        assert!(crate::linalg::unitarity_residual(&res.unitary) <= 1e-12);
    }

    #[test]
    fn constant_diagonal_on_random_states() {
        let mut rng = seeded_rng(107);
        for d in 2..=6 {
            for _ in 0..10 {
                let rho = ginibre_mixed(d, &mut rng);
                let res = constant_diagonal_unitary(&rho);
                assert!(res.rotations <= d - 1);
                assert!(is_maximally_uncertain(&res.conjugated, 1e-8));
                assert!(crate::linalg::unitarity_residual(&res.unitary) <= 1e-10);
                // conjugated really is U' rho U.
                let direct = conjugate(&rho, &res.unitary.adjoint()).unwrap();
                assert!(state_distance(&direct, &res.conjugated) <= 1e-10);
            }
        }
        // Already-constant diagonal: zero rotations.
        let res = constant_diagonal_unitary(&DensityMatrix::maximally_mixed(3));
        assert_eq!(res.rotations, 0);
    }
}
