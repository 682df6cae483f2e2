//! Command-line harness: configuration, experiment drivers and output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use config::{
    from_table, load_table, ConvergenceConfig, DecomposeConfig, InitSweepConfig, LandscapeConfig, ShotsConfig, Validate,
};
use error::CliError;
use output::{write_file, write_sidecar, Metadata};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Convergence,
    InitSweep,
    Shots,
    Landscape,
    Decompose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::InitSweep => "init-sweep",
            Command::Shots => "shots",
            Command::Landscape => "landscape",
            Command::Decompose => "decompose",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct CommonOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub overrides: Vec<String>,
}

fn unused_flag(command: Command, flag: &str) -> CliError {
    CliError::Config {
        key: None,
        message: format!("{flag} is not used by {}", command.name()),
    }
}

fn load<T: serde::de::DeserializeOwned + Validate>(opts: &CommonOptions) -> Result<T, CliError> {
    from_table(load_table(opts.config.as_deref(), &opts.overrides)?)
}

pub fn run(command: Command, opts: &CommonOptions) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        if t == 0 {
            return Err(CliError::Config {
                key: Some("threads".into()),
                message: "must be at least 1".into(),
            });
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config {
        key: Some("threads".into()),
        message: e.to_string(),
    })?;
    pool.install(|| dispatch(command, opts))
}

fn dispatch(command: Command, opts: &CommonOptions) -> Result<(), CliError> {
    let start = Instant::now();
    match command {
        Command::Convergence => {
            let mut cfg: ConvergenceConfig = load(opts)?;
            apply_common(&mut cfg.seed, &mut cfg.trials, &mut cfg.out, opts);
            cfg.validate()?;
            let result = experiments::run_convergence(&cfg)?;
            let csv = experiments::convergence_csv(&result);
            let summary: Vec<_> = result
                .series
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "N": s.num_layers,
                        "step_size": s.step_size,
                        "theoretical_rate": s.theoretical_rate,
                        "median_iterations_to_target": s.median_iterations_to_target,
                        "mean_initial_gap": s.mean_initial_gap,
                        "descent_violations": s.descent_violations,
                    })
                })
                .collect();
            let path = cfg.out.clone().unwrap_or_else(|| "convergence.csv".into());
            let notes = [
                "gap is f - E_0 with E_0 from exact diagonalization",
                "runs that stop at the numerical floor hold their last gap",
                "trials that never reach target_gap count as max_iters + 1 in the median",
            ];
            emit(
                command,
                &path,
                csv.as_str(),
                &cfg,
                Some(cfg.seed),
                &notes,
                summary,
                start,
            )
        }
        Command::InitSweep => {
            let mut cfg: InitSweepConfig = load(opts)?;
            apply_common(&mut cfg.seed, &mut cfg.trials, &mut cfg.out, opts);
            cfg.validate()?;
            let result = experiments::run_init_sweep(&cfg)?;
            let csv = experiments::init_sweep_csv(&result);
            let path = cfg.out.clone().unwrap_or_else(|| "init_sweep.csv".into());
            let notes = [
                "init gap is g(U^0) - E_0, the quantity the high-probability bound controls",
                "trial i reuses its Pauli strings and normal variates across sigma values",
            ];
            emit(
                command,
                &path,
                csv.as_str(),
                &cfg,
                Some(cfg.seed),
                &notes,
                &result.feasible,
                start,
            )
        }
        Command::Shots => {
            let mut cfg: ShotsConfig = load(opts)?;
            apply_common(&mut cfg.seed, &mut cfg.trials, &mut cfg.out, opts);
            cfg.validate()?;
            let result = experiments::run_shots(&cfg)?;
            let csv = experiments::shots_csv(&result);
            let path = cfg.out.clone().unwrap_or_else(|| "shots.csv".into());
            let summary = serde_json::json!({
                "ground_energy": result.ground_energy,
                "circuit_energy": result.circuit_energy,
                "coefficients": result.coefficients,
                "exact_rms": result.rows.iter().map(|r| serde_json::json!({
                    "M_tot": r.budget,
                    "uniform": r.exact_rms_uniform,
                    "adaptive": r.exact_rms_adaptive,
                })).collect::<Vec<_>>(),
            });
            let notes = ["rms errors are over trials of the estimate minus the exact circuit energy"];
            emit(
                command,
                &path,
                csv.as_str(),
                &cfg,
                Some(cfg.seed),
                &notes,
                summary,
                start,
            )
        }
        Command::Landscape => {
            reject_sampling_flags(command, opts)?;
            let mut cfg: LandscapeConfig = load(opts)?;
            if opts.out.is_some() {
                cfg.out = opts.out.clone();
            }
            cfg.validate()?;
            let ph = experiments::load_hamiltonian(&cfg)?;
            let report = experiments::landscape_report(&experiments::run_landscape(&ph)?);
            write_or_print(cfg.out.as_deref(), &report)
        }
        Command::Decompose => {
            reject_sampling_flags(command, opts)?;
            let mut cfg: DecomposeConfig = load(opts)?;
            if opts.out.is_some() {
                cfg.out = opts.out.clone();
            }
            cfg.validate()?;
            let input = cfg.input.as_ref().expect("validated");
            let text = std::fs::read_to_string(input).map_err(|e| CliError::Config {
                key: Some("input".into()),
                message: format!("cannot read {}: {e}", input.display()),
            })?;
            let matrix = experiments::parse_matrix(&text)?;
            let n = matrix.rows().trailing_zeros() as usize;
            if matrix.rows().is_power_of_two() && n > config::DEFAULT_MAX_QUBITS && !cfg.allow_large {
                return Err(CliError::Config {
                    key: Some("input".into()),
                    message: format!("{n} qubits exceeds the default cap; set allow_large = true"),
                });
            }
            let ph = experiments::run_decompose(&matrix)?;
            write_or_print(cfg.out.as_deref(), &ph.to_text())
        }
    }
}

fn apply_common(seed: &mut u64, trials: &mut usize, out: &mut Option<PathBuf>, opts: &CommonOptions) {
    if let Some(s) = opts.seed {
        *seed = s;
    }
    if let Some(t) = opts.trials {
        *trials = t;
    }
    if opts.out.is_some() {
        *out = opts.out.clone();
    }
}

fn reject_sampling_flags(command: Command, opts: &CommonOptions) -> Result<(), CliError> {
    if opts.seed.is_some() {
        return Err(unused_flag(command, "--seed"));
    }
    if opts.trials.is_some() {
        return Err(unused_flag(command, "--trials"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn emit<C: Serialize, S: Serialize>(
    command: Command,
    path: &Path,
    csv: &str,
    cfg: &C,
    seed: Option<u64>,
    notes: &[&str],
    summary: S,
    start: Instant,
) -> Result<(), CliError> {
    write_file(path, csv)?;
    let meta = Metadata {
        command: command.name(),
        version: VERSION,
        seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config: cfg,
        notes,
        summary,
    };
    write_sidecar(path, &meta)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
