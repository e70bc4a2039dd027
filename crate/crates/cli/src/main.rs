//! Batch front door: compute measures from state files, verify channels,
//! run the coherence-of-assistance search, sweep random ensembles to CSV,
//! and emit the qubit Bloch-ball dataset.
//!
//! Exit codes: 0 success / positive verdict, 1 negative verdict,
//! 2 input or usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use uncert_core::assist::{coherence_of_assistance, sandwich_check_with, CaOptConfig};
use uncert_core::channels::is_certain_operation;
use uncert_core::io::{parse_kraus_json, parse_state_json};
use uncert_core::measures::{
    is_maximally_uncertain, shannon_entropy, u_entropy, u_geometric_with, u_var, GeomOptConfig,
    MeasureReport, SymmetricConcaveFn,
};
use uncert_core::random::{derive_seed, ginibre_mixed, seeded_rng};
use uncert_core::state::from_bloch_vector;
use uncert_core::DensityMatrix;

#[derive(Parser)]
#[command(
    name = "uncert",
    version,
    about = "Uncertainty of quantum states under a projective measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckKind {
    /// Theorem-1 predicate: certain states map to certain states.
    Certain,
    /// Theorem-2 predicate: Kraus operators factor as D_l P_pi.
    Preserving,
}

#[derive(Subcommand)]
enum Command {
    /// Compute uncertainty measures for a state file (JSON to stdout).
    Measure {
        /// State file (mixed d x d or pure amplitude vector, JSON).
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated measure names: var, entropy, fidelity.
        #[arg(long, value_delimiter = ',', default_value = "var,entropy,fidelity")]
        measures: Vec<String>,
        #[arg(long, default_value_t = 2.0)]
        log_base: f64,
        /// Seed for the fidelity-measure optimizer.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a Kraus channel against a certainty predicate.
    VerifyChannel {
        /// Channel file: { dim, kraus: [{re, im}, ...] }.
        #[arg(long)]
        kraus: PathBuf,
        #[arg(long, value_enum)]
        check: CheckKind,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Lower-bound the coherence of assistance by decomposition search.
    Ca {
        #[arg(long)]
        state: PathBuf,
        /// Measure name: var, entropy (alias ent), fidelity.
        #[arg(long, default_value = "entropy")]
        measure: String,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ensemble cardinality m (default: rank^2 capped at 16).
        #[arg(long)]
        ensemble_size: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        log_base: f64,
    },
    /// Sample random states and write measure/C_a rows to CSV.
    Sweep {
        /// Hilbert-space dimension, 2..=8.
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Restarts for each embedded C_a search.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 2.0)]
        log_base: f64,
    },
    /// Grid the qubit Bloch ball and tabulate all three measures.
    BlochDisc {
        /// Points per axis over [-1, 1].
        #[arg(long)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Core(uncert_core::Error),
    Io(std::io::Error),
    Csv(csv::Error),
}

impl From<uncert_core::Error> for CliError {
    fn from(e: uncert_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Csv(e) => write!(f, "csv error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Measure {
            state,
            measures,
            log_base,
            seed,
        } => cmd_measure(&state, &measures, log_base, seed),
        Command::VerifyChannel { kraus, check, tol } => cmd_verify_channel(&kraus, check, tol),
        Command::Ca {
            state,
            measure,
            restarts,
            seed,
            ensemble_size,
            log_base,
        } => cmd_ca(&state, &measure, restarts, seed, ensemble_size, log_base),
        Command::Sweep {
            dim,
            samples,
            seed,
            out,
            restarts,
            log_base,
        } => cmd_sweep(dim, samples, seed, &out, restarts, log_base),
        Command::BlochDisc { resolution, out } => cmd_bloch_disc(resolution, &out),
    }
}

fn load_state(path: &PathBuf) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(parse_state_json(&text)?)
}

fn cmd_measure(
    path: &PathBuf,
    measures: &[String],
    log_base: f64,
    seed: u64,
) -> Result<u8, CliError> {
    let rho = load_state(path)?;
    let mut reports: Vec<MeasureReport> = Vec::new();
    for name in measures {
        // Resolve through the catalog so unknown names fail before compute.
        let f = SymmetricConcaveFn::builtin(name, log_base)?;
        match f.name() {
            "var" => reports.extend(u_var(&rho)?),
            "entropy" => reports.push(u_entropy(&rho, log_base)?),
            "fidelity" => {
                let cfg = GeomOptConfig {
                    seed,
                    ..GeomOptConfig::default()
                };
                reports.push(u_geometric_with(&rho, &cfg)?.0);
            }
            other => return Err(CliError::Usage(format!("unhandled measure '{other}'"))),
        }
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&reports).expect("reports serialize")
    );
    Ok(0)
}

fn cmd_verify_channel(path: &PathBuf, check: CheckKind, tol: f64) -> Result<u8, CliError> {
    let text = fs::read_to_string(path)?;
    let channel = parse_kraus_json(&text)?;
    let verdict = is_certain_operation(&channel, tol);
    println!(
        "{}",
        serde_json::to_string_pretty(&verdict).expect("verdict serializes")
    );
    let pass = match check {
        CheckKind::Certain => verdict.is_certain,
        CheckKind::Preserving => verdict.is_uncertainty_preserving,
    };
    Ok(if pass { 0 } else { 1 })
}

fn cmd_ca(
    path: &PathBuf,
    measure: &str,
    restarts: usize,
    seed: u64,
    ensemble_size: Option<usize>,
    log_base: f64,
) -> Result<u8, CliError> {
    let rho = load_state(path)?;
    let f = SymmetricConcaveFn::builtin(measure, log_base)?;
    let cfg = CaOptConfig {
        restarts,
        seed,
        ensemble_size,
        ..CaOptConfig::default()
    };
    let result = coherence_of_assistance(&f, &rho, &cfg)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&result).expect("result serializes")
    );
    Ok(0)
}

/// 12 significant digits, reproducible across runs.
fn fmt_g(x: f64) -> String {
    format!("{x:.11e}")
}

fn cmd_sweep(
    dim: usize,
    samples: usize,
    seed: u64,
    out: &PathBuf,
    restarts: usize,
    log_base: f64,
) -> Result<u8, CliError> {
    if !(2..=8).contains(&dim) {
        return Err(CliError::Usage(format!("dim must be in 2..=8, got {dim}")));
    }
    if samples == 0 {
        return Err(CliError::Usage("samples must be >= 1".into()));
    }
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record([
        "state_id",
        "measure",
        "total",
        "quantum",
        "classical",
        "ca_lower",
        "sandwich_ok",
    ])?;

    let measures = SymmetricConcaveFn::all_builtins(log_base);
    for state_id in 0..samples {
        let mut rng = seeded_rng(derive_seed(seed, state_id as u64));
        let rho = ginibre_mixed(dim, &mut rng);
        let geom_cfg = GeomOptConfig::fast(derive_seed(seed, (state_id as u64) << 20));
        for (m_idx, f) in measures.iter().enumerate() {
            let report = match f.name() {
                "var" => u_var(&rho)?[0].clone(),
                "entropy" => u_entropy(&rho, log_base)?,
                "fidelity" => u_geometric_with(&rho, &geom_cfg)?.0,
                other => return Err(CliError::Usage(format!("unhandled measure '{other}'"))),
            };
            let ca_cfg = CaOptConfig {
                restarts,
                seed: derive_seed(seed, ((state_id * 3 + m_idx) as u64) | (1 << 40)),
                ..CaOptConfig::fast(0)
            };
            let ca = coherence_of_assistance(f, &rho, &ca_cfg)?;
            let sandwich = sandwich_check_with(f, &rho, &ca, &geom_cfg)?;
            writer.write_record([
                state_id.to_string(),
                f.name().to_string(),
                fmt_g(report.total),
                fmt_g(report.quantum),
                fmt_g(report.classical),
                fmt_g(ca.value),
                sandwich.ok.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(0)
}

fn cmd_bloch_disc(resolution: usize, out: &PathBuf) -> Result<u8, CliError> {
    if resolution < 2 {
        return Err(CliError::Usage(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record([
        "x",
        "y",
        "z",
        "u_var",
        "u_s",
        "u_f",
        "is_max_uncertain",
        "is_pure",
    ])?;
    let n = resolution;
    let coord = |i: usize| (2 * i) as f64 / (n - 1) as f64 - 1.0;
    for ix in 0..n {
        let x = coord(ix);
        for iy in 0..n {
            let y = coord(iy);
            for iz in 0..n {
                let z = coord(iz);
                let r2 = x * x + y * y + z * z;
                if r2 > 1.0 + 1e-12 {
                    continue;
                }
                let rho = from_bloch_vector(x, y, z)?;
                let probs = rho.diagonal_probs();
                let p = probs.as_slice();
                let u_var_total = 1.0 - p.iter().map(|q| q * q).sum::<f64>();
                let u_s_total = shannon_entropy(p, 2.0);
                let u_f_total = 1.0 - p.iter().copied().fold(0.0, f64::max);
                writer.write_record([
                    fmt_g(x),
                    fmt_g(y),
                    fmt_g(z),
                    fmt_g(u_var_total),
                    fmt_g(u_s_total),
                    fmt_g(u_f_total),
                    is_maximally_uncertain(&rho, 1e-9).to_string(),
                    ((r2 - 1.0).abs() <= 1e-9).to_string(),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(0)
}
