//! Uncertainty measures generated by nonnegative symmetric concave functions.
//!
//! Any such function f of the measurement statistics defines a total
//! uncertainty U(rho) = f(rho_00, ..., rho_{d-1,d-1}). The built-in catalog
//! covers the variance, entropy, and fidelity based measures, each with its
//! pinned quantum/classical decomposition:
//!
//! - `var`:      U = 1 - sum rho_ii^2, split into skew information vs mixing
//!               (and alternatively linear entropy vs dephasing gain),
//! - `entropy`:  U = Shannon entropy of the diagonal, split into relative
//!               entropy coherence vs von Neumann entropy,
//! - `fidelity`: U = 1 - max_i rho_ii, split into geometric coherence vs the
//!               remaining best-diagonal fidelity gap.
//!
//! Additional functions are registrable; their axioms (zero at the vertex,
//! permutation symmetry, concavity, strict positivity off the vertices) are
//! sampled at registration time.

mod geometric;

pub use geometric::{geometric_coherence, GeomOptConfig, GeomResult};

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::{derive_seed, seeded_rng};
use crate::state::{matrix_sqrt, DensityMatrix, ProbabilityVector};
use rand::Rng;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Nonnegative symmetric concave function on the probability simplex.
#[derive(Clone)]
pub struct SymmetricConcaveFn {
    name: String,
    log_base: Option<f64>,
    eval: EvalFn,
}

impl fmt::Debug for SymmetricConcaveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricConcaveFn")
            .field("name", &self.name)
            .field("log_base", &self.log_base)
            .finish()
    }
}

impl SymmetricConcaveFn {
    /// f(p) = 1 - sum p_i^2 (variance based).
    pub fn f_var() -> Self {
        Self {
            name: "var".into(),
            log_base: None,
            eval: Arc::new(|p| 1.0 - p.iter().map(|x| x * x).sum::<f64>()),
        }
    }

    /// f(p) = -sum p_i log_b p_i (entropy based).
    pub fn f_ent(base: f64) -> Result<Self> {
        if !(base > 1.0) || !base.is_finite() {
            return Err(Error::BadLogBase(base));
        }
        Ok(Self {
            name: "entropy".into(),
            log_base: Some(base),
            eval: Arc::new(move |p| shannon_entropy(p, base)),
        })
    }

    /// f(p) = 1 - max_i p_i (fidelity based).
    pub fn f_max() -> Self {
        Self {
            name: "fidelity".into(),
            log_base: None,
            eval: Arc::new(|p| 1.0 - p.iter().copied().fold(0.0, f64::max)),
        }
    }

    /// Catalog lookup by measure name (aliases accepted).
    pub fn builtin(name: &str, log_base: f64) -> Result<Self> {
        match name {
            "var" | "variance" => Ok(Self::f_var()),
            "entropy" | "ent" | "shannon" => Self::f_ent(log_base),
            "fidelity" | "max" | "geometric" => Ok(Self::f_max()),
            other => Err(Error::UnknownMeasure(other.into())),
        }
    }

    /// The three built-ins, in catalog order.
    pub fn all_builtins(log_base: f64) -> Vec<Self> {
        vec![
            Self::f_var(),
            Self::f_ent(log_base).expect("default base is valid"),
            Self::f_max(),
        ]
    }

    /// Registers a custom function after sampling its axioms; rejects any
    /// candidate violating zero-at-vertex, permutation symmetry, concavity,
    /// or strict positivity on interior points.
    pub fn register(
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        check_axioms(&name, &eval)?;
        Ok(Self {
            name,
            log_base: None,
            eval: Arc::new(eval),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn log_base(&self) -> Option<f64> {
        self.log_base
    }

    pub fn eval(&self, probs: &[f64]) -> f64 {
        (self.eval)(probs)
    }

    /// f at the uniform vector: the measure's maximum over all states.
    pub fn max_value(&self, dim: usize) -> f64 {
        self.eval(ProbabilityVector::uniform(dim).as_slice())
    }
}

/// -sum p log_b p with 0 log 0 = 0; negative roundoff entries are ignored.
pub fn shannon_entropy(probs: &[f64], base: f64) -> f64 {
    let ln_b = base.ln();
    probs
        .iter()
        .map(|&p| if p > 0.0 { -p * p.ln() / ln_b } else { 0.0 })
        .sum()
}

fn random_simplex_point(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|_| -(rng.random::<f64>().max(1e-300)).ln())
        .collect();
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
    v
}

fn check_axioms(name: &str, eval: &dyn Fn(&[f64]) -> f64) -> Result<()> {
    let violation = |axiom: &'static str, detail: String| Error::AxiomViolation {
        name: name.to_string(),
        axiom,
        detail,
    };
    let mut rng = seeded_rng(0x5EED_ACC0);
    for dim in 2..=5 {
        let mut vertex = vec![0.0; dim];
        vertex[0] = 1.0;
        let fv = eval(&vertex);
        if fv.abs() > 1e-9 {
            return Err(violation("f(1,0,...,0) = 0", format!("got {fv:e} at d={dim}")));
        }
        for trial in 0..60 {
            let x = random_simplex_point(dim, &mut rng);
            let fx = eval(&x);
            if fx < -1e-9 {
                return Err(violation("nonnegativity", format!("f = {fx:e} at d={dim}")));
            }
            if x.iter().all(|&p| p > 1e-3) && fx <= 1e-12 {
                return Err(violation(
                    "strict nullity off certain vertices",
                    format!("f = {fx:e} at interior point, d={dim}"),
                ));
            }
            // Permutation symmetry on a random shuffle.
            let mut perm = x.clone();
            for i in (1..dim).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let fp = eval(&perm);
            if (fp - fx).abs() > 1e-9 {
                return Err(violation(
                    "permutation symmetry",
                    format!("|f(Px) - f(x)| = {:e} at d={dim}", (fp - fx).abs()),
                ));
            }
            // Concavity against a second sample.
            let y = random_simplex_point(dim, &mut rng);
            let lambda: f64 = rng.random();
            let mix: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(&a, &b)| lambda * a + (1.0 - lambda) * b)
                .collect();
            let lhs = eval(&mix);
            let rhs = lambda * fx + (1.0 - lambda) * eval(&y);
            if lhs < rhs - 1e-9 {
                return Err(violation(
                    "concavity",
                    format!("gap {:e} at d={dim}, trial {trial}", rhs - lhs),
                ));
            }
        }
    }
    Ok(())
}

/// Total / quantum / classical split of one measure on one state.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub measure: String,
    pub total: f64,
    pub quantum: f64,
    pub classical: f64,
    pub meta: ReportMeta,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub log_base: Option<f64>,
    pub decomposition: String,
}

/// U(rho) = f(diagonal of rho).
pub fn uncertainty(f: &SymmetricConcaveFn, rho: &DensityMatrix) -> f64 {
    f.eval(rho.diagonal_probs().as_slice())
}

/// Skew-information coherence: 1 - sum_i <i|sqrt(rho)|i>^2. Equals
/// -(1/2) sum_i Tr [sqrt(rho), Pi_i]^2.
pub fn skew_information(rho: &DensityMatrix) -> Result<f64> {
    let s = matrix_sqrt(rho)?;
    let sum: f64 = (0..rho.dim()).map(|i| s[(i, i)].re.powi(2)).sum();
    Ok(1.0 - sum)
}

/// Von Neumann entropy from the eigenvalues, in the given log base.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: f64) -> f64 {
    let (values, _) = rho.eigen();
    shannon_entropy(&values, base)
}

/// Relative entropy of coherence S(dephase(rho)) - S(rho).
pub fn relative_entropy_coherence(rho: &DensityMatrix, base: f64) -> f64 {
    shannon_entropy(rho.diagonal_probs().as_slice(), base) - von_neumann_entropy(rho, base)
}

/// Variance-based measure with both of its decompositions:
/// `[skew, linear_entropy]`.
///
/// Skew split: quantum = skew information, classical = the remainder.
/// Linear-entropy split: classical = S2(rho) = 1 - Tr rho^2, quantum =
/// S2(dephase(rho)) - S2(rho).
pub fn u_var(rho: &DensityMatrix) -> Result<[MeasureReport; 2]> {
    let probs = rho.diagonal_probs();
    let sum_p2: f64 = probs.as_slice().iter().map(|p| p * p).sum();
    let total = 1.0 - sum_p2;

    let quantum_skew = skew_information(rho)?;
    let classical_skew = total - quantum_skew;

    let purity = rho.purity();
    let classical_lin = 1.0 - purity;
    let quantum_lin = total - classical_lin;

    Ok([
        MeasureReport {
            measure: "var".into(),
            total,
            quantum: quantum_skew,
            classical: classical_skew,
            meta: ReportMeta {
                log_base: None,
                decomposition: "skew".into(),
            },
        },
        MeasureReport {
            measure: "var".into(),
            total,
            quantum: quantum_lin,
            classical: classical_lin,
            meta: ReportMeta {
                log_base: None,
                decomposition: "linear_entropy".into(),
            },
        },
    ])
}

/// Entropy-based measure: total = Shannon entropy of the diagonal,
/// classical = S(rho), quantum = relative entropy coherence.
pub fn u_entropy(rho: &DensityMatrix, log_base: f64) -> Result<MeasureReport> {
    if !(log_base > 1.0) || !log_base.is_finite() {
        return Err(Error::BadLogBase(log_base));
    }
    let total = shannon_entropy(rho.diagonal_probs().as_slice(), log_base);
    let classical = von_neumann_entropy(rho, log_base);
    let quantum = total - classical;
    Ok(MeasureReport {
        measure: "entropy".into(),
        total,
        quantum,
        classical,
        meta: ReportMeta {
            log_base: Some(log_base),
            decomposition: "relative_entropy".into(),
        },
    })
}

/// Fidelity-based measure: total = 1 - max_i rho_ii, quantum = geometric
/// coherence (optimized over diagonal states), classical = the remainder.
pub fn u_geometric(rho: &DensityMatrix) -> Result<MeasureReport> {
    u_geometric_with(rho, &GeomOptConfig::default()).map(|(report, _)| report)
}

pub fn u_geometric_with(
    rho: &DensityMatrix,
    cfg: &GeomOptConfig,
) -> Result<(MeasureReport, GeomResult)> {
    let gc = geometric_coherence(rho, cfg)?;
    let max_p = rho
        .diagonal_probs()
        .as_slice()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let total = 1.0 - max_p;
    let quantum = gc.value;
    let classical = total - quantum;
    Ok((
        MeasureReport {
            measure: "fidelity".into(),
            total,
            quantum,
            classical,
            meta: ReportMeta {
                log_base: None,
                decomposition: "geometric".into(),
            },
        },
        gc,
    ))
}

/// All reports for a state at once: both `var` splits, `entropy`, `fidelity`.
pub fn all_reports(rho: &DensityMatrix, log_base: f64) -> Result<Vec<MeasureReport>> {
    let [skew, lin] = u_var(rho)?;
    Ok(vec![skew, lin, u_entropy(rho, log_base)?, u_geometric(rho)?])
}

/// x majorizes y: every prefix sum of descending-sorted x dominates y's,
/// and the totals agree within 1e-9.
pub fn majorizes(x: &ProbabilityVector, y: &ProbabilityVector) -> Result<bool> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let sort_desc = |p: &ProbabilityVector| {
        let mut v = p.as_slice().to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).expect("probabilities are finite"));
        v
    };
    let xs = sort_desc(x);
    let ys = sort_desc(y);
    let mut px = 0.0;
    let mut py = 0.0;
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px < py - 1e-9 {
            return Ok(false);
        }
    }
    Ok((px - py).abs() <= 1e-9)
}

/// Theorem-level characterization: every diagonal entry equals 1/d within tol.
pub fn is_maximally_uncertain(rho: &DensityMatrix, tol: f64) -> bool {
    let d = rho.dim() as f64;
    rho.diagonal_probs()
        .as_slice()
        .iter()
        .all(|&p| (p - 1.0 / d).abs() <= tol)
}

/// Quantum part of the pinned decomposition for a built-in measure.
///
/// `var` pins the skew-information split, `entropy` the relative-entropy
/// split, `fidelity` the geometric split (optimizer-backed). Custom
/// functions have no pinned mixed-state extension.
pub fn pinned_coherence(f: &SymmetricConcaveFn, rho: &DensityMatrix) -> Result<f64> {
    pinned_coherence_with(f, rho, &GeomOptConfig::default())
}

pub fn pinned_coherence_with(
    f: &SymmetricConcaveFn,
    rho: &DensityMatrix,
    geom_cfg: &GeomOptConfig,
) -> Result<f64> {
    match f.name() {
        "var" => skew_information(rho),
        "entropy" => Ok(relative_entropy_coherence(rho, f.log_base().unwrap_or(2.0))),
        "fidelity" => Ok(geometric_coherence(rho, geom_cfg)?.value),
        other => Err(Error::UnpinnedMeasure(other.into())),
    }
}

/// Deterministic per-index seeds for optimizer restarts.
pub(crate) fn restart_seed(master: u64, restart: usize) -> u64 {
    derive_seed(master, restart as u64)
}
