//! Geometric coherence C_f(rho) = 1 - max over diagonal sigma of F(rho, sigma).
//!
//! The fidelity is concave in sigma on the simplex, so multiplicative-weights
//! ascent from an interior point converges to the global maximum; restarts
//! guard against boundary stalls. The d vertex states are always evaluated
//! too, which pins best fidelity >= max_i rho_ii and hence C_f <= U_f.

use rand::Rng;

use crate::error::Result;
use crate::linalg::{C64, CMatrix};
use crate::random::seeded_rng;
use crate::state::{matrix_sqrt, DensityMatrix, ProbabilityVector};

use super::restart_seed;

/// Knobs for [`geometric_coherence`].
#[derive(Debug, Clone)]
pub struct GeomOptConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Central-difference step for the fidelity gradient.
    pub grad_step: f64,
    /// Multiplicative-weights learning rate.
    pub learning_rate: f64,
    /// Stop a restart after this many iterations without improving by more
    /// than `stall_tol`.
    pub stall_iters: usize,
    pub stall_tol: f64,
    pub seed: u64,
}

impl Default for GeomOptConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 400,
            grad_step: 1e-6,
            learning_rate: 4.0,
            stall_iters: 60,
            stall_tol: 1e-12,
            seed: 0,
        }
    }
}

impl GeomOptConfig {
    /// Smaller budget for bulk sweeps; the objective is concave, so a few
    /// restarts suffice.
    pub fn fast(seed: u64) -> Self {
        Self {
            restarts: 4,
            max_iters: 200,
            seed,
            ..Self::default()
        }
    }
}

/// Outcome of the diagonal-state fidelity maximization.
#[derive(Debug, Clone)]
pub struct GeomResult {
    /// 1 - best fidelity found (a lower bound on the true maximum makes this
    /// an upper bound on the true C_f).
    pub value: f64,
    pub best_fidelity: f64,
    /// The maximizing diagonal state.
    pub sigma: ProbabilityVector,
    pub converged: bool,
}

struct FidelityOnSimplex {
    sqrt_rho: CMatrix,
    dim: usize,
}

impl FidelityOnSimplex {
    fn new(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self {
            sqrt_rho: matrix_sqrt(rho)?,
            dim: rho.dim(),
        })
    }

    /// F(rho, diag(sigma)) extended to the nonnegative orthant (no clamp, so
    /// finite differences stay smooth). sqrt(diag(sigma)) is a column scaling
    /// of sqrt(rho), so each evaluation is one small SVD.
    fn eval(&self, sigma: &[f64]) -> f64 {
        let d = self.dim;
        let s = &self.sqrt_rho;
        let product = CMatrix::from_fn(d, d, |i, j| s[(i, j)].scale(sigma[j].max(0.0).sqrt()));
        let sv = product.svd(false, false).singular_values;
        let nuclear: f64 = sv.iter().sum();
        nuclear * nuclear
    }

    fn gradient(&self, sigma: &[f64], h: f64, f_here: f64) -> Vec<f64> {
        let mut grad = vec![0.0; self.dim];
        let mut probe = sigma.to_vec();
        for i in 0..self.dim {
            let base = sigma[i];
            probe[i] = base + h;
            let up = self.eval(&probe);
            if base >= h {
                probe[i] = base - h;
                let down = self.eval(&probe);
                grad[i] = (up - down) / (2.0 * h);
            } else {
                grad[i] = (up - f_here) / h;
            }
            probe[i] = base;
        }
        grad
    }
}

fn interior_random(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|_| -(rng.random::<f64>().max(1e-300)).ln())
        .collect();
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
    v
}

fn floor_and_renormalize(sigma: &mut [f64]) {
    let mut total = 0.0;
    for x in sigma.iter_mut() {
        if *x < 1e-18 {
            *x = 1e-18;
        }
        total += *x;
    }
    for x in sigma.iter_mut() {
        *x /= total;
    }
}

/// Maximizes F(rho, sigma) over diagonal states sigma.
pub fn geometric_coherence(rho: &DensityMatrix, cfg: &GeomOptConfig) -> Result<GeomResult> {
    let d = rho.dim();
    let objective = FidelityOnSimplex::new(rho)?;
    let diag = rho.diagonal_probs().into_vec();

    let mut best_f = f64::NEG_INFINITY;
    let mut best_sigma = vec![0.0; d];
    let mut best_from_stalled_restart = true;
    let consider = |f: f64, sigma: &[f64], stalled: bool, best_f: &mut f64,
                        best_sigma: &mut Vec<f64>, best_stall: &mut bool| {
        if f > *best_f {
            *best_f = f;
            best_sigma.clear();
            best_sigma.extend_from_slice(sigma);
            *best_stall = stalled;
        }
    };

    // Vertex candidates: F(rho, |i><i|) = rho_ii. These cost one eval each
    // and make the geometric classical part nonnegative by construction.
    for i in 0..d {
        let mut vertex = vec![0.0; d];
        vertex[i] = 1.0;
        let f = objective.eval(&vertex);
        consider(f, &vertex, true, &mut best_f, &mut best_sigma, &mut best_from_stalled_restart);
    }
    // The diagonal of rho itself (exact optimum whenever rho is diagonal).
    let f_diag = objective.eval(&diag);
    consider(f_diag, &diag, true, &mut best_f, &mut best_sigma, &mut best_from_stalled_restart);

    for restart in 0..cfg.restarts {
        let mut rng = seeded_rng(restart_seed(cfg.seed, restart));
        let mut sigma: Vec<f64> = if restart == 0 {
            diag.iter().map(|&p| 0.9 * p + 0.1 / d as f64).collect()
        } else {
            interior_random(d, &mut rng)
        };
        floor_and_renormalize(&mut sigma);

        let mut local_best = f64::NEG_INFINITY;
        let mut stall = 0usize;
        let mut stalled_out = false;
        for _ in 0..cfg.max_iters {
            let f_here = objective.eval(&sigma);
            if f_here > local_best + cfg.stall_tol {
                local_best = f_here;
                stall = 0;
            } else {
                stall += 1;
                if stall >= cfg.stall_iters {
                    stalled_out = true;
                    break;
                }
            }
            consider(f_here, &sigma, stalled_out, &mut best_f, &mut best_sigma, &mut best_from_stalled_restart);

            let grad = objective.gradient(&sigma, cfg.grad_step, f_here);
            let g_max = grad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (x, g) in sigma.iter_mut().zip(&grad) {
                *x *= (cfg.learning_rate * (g - g_max)).max(-700.0).exp();
            }
            floor_and_renormalize(&mut sigma);
        }
        let f_final = objective.eval(&sigma);
        consider(f_final, &sigma, stalled_out, &mut best_f, &mut best_sigma, &mut best_from_stalled_restart);
    }

    let best_fidelity = best_f.clamp(0.0, 1.0);
    Ok(GeomResult {
        value: 1.0 - best_fidelity,
        best_fidelity,
        sigma: ProbabilityVector::new(best_sigma)
            .expect("optimizer iterates stay on the simplex"),
        converged: best_from_stalled_restart,
    })
}
