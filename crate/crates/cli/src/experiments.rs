//! The experiment drivers behind each subcommand. Every driver returns its
//! data; rendering to CSV or text is separate so results can be inspected
//! directly.

use rayon::prelude::*;
use serde::Serialize;

use unitary_vqe::hamiltonian::{analyze_spectrum_default, random_pauli_hamiltonian, tfim};
use unitary_vqe::init::{
    apply_rotations, feasible_sigma_interval, init_error_bound, sample_initial_layers, sample_rotations,
    InitBoundInputs, InitConfig, PauliChoice, SigmaInterval, DEFAULT_SPLIT,
};
use unitary_vqe::linalg::{self, ComplexMatrix, StateVector, C64};
use unitary_vqe::manifold::{classify_critical_points, riemannian_gradient_single, CriticalKind};
use unitary_vqe::measurement::{
    adaptive_allocation, exact_expectations, sample_noisy_objective, statistical_error_bound, uniform_allocation,
};
use unitary_vqe::optimizer::{rgd_product, theoretical_rate, OptimizerConfig, Problem, StepSize};
use unitary_vqe::pauli::{decompose, reconstruct, PauliHamiltonian};
use unitary_vqe::rng::stream_rng;

use crate::config::{ConvergenceConfig, InitSweepConfig, LandscapeConfig, Reference, ShotsConfig};
use crate::error::CliError;
use crate::output::{fmt_float, CsvTable};

const STREAM_CONVERGENCE: u64 = 1;
const STREAM_INIT_SWEEP: u64 = 2;
const STREAM_SHOTS_HAMILTONIAN: u64 = 3;
const STREAM_SHOTS_INIT: u64 = 4;
const STREAM_SHOTS_TRIAL: u64 = 5;

pub fn reference_state(reference: Reference, problem: &Problem) -> StateVector {
    match reference {
        Reference::E0 => StateVector::basis(problem.dim(), 0),
        Reference::Ground => StateVector::new(problem.spectrum.eigvec(0)).expect("eigenvectors are normalized"),
    }
}

pub fn tfim_problem(n: usize) -> Result<Problem, CliError> {
    Ok(Problem::new(reconstruct(&tfim(n)?)?)?)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Median of `values`, averaging the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSeries {
    pub num_layers: usize,
    pub step_size: f64,
    pub theoretical_rate: Option<f64>,
    /// Recorded iterations `0, record_every, 2 record_every, ...`.
    pub t: Vec<usize>,
    pub mean_gap: Vec<f64>,
    pub std_gap: Vec<f64>,
    /// Per trial: first iteration with gap at most `target_gap`, if reached.
    pub iterations_to_target: Vec<Option<usize>>,
    /// Trials that never reach the target count as `max_iters + 1`.
    pub median_iterations_to_target: f64,
    pub mean_initial_gap: f64,
    pub descent_violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceResult {
    pub ground_energy: f64,
    pub spectral_gap: f64,
    pub h_norm: f64,
    pub series: Vec<ConvergenceSeries>,
}

/// RGD on the transverse-field Ising model from random small-angle starts,
/// for each configured depth.
pub fn run_convergence(cfg: &ConvergenceConfig) -> Result<ConvergenceResult, CliError> {
    let problem = tfim_problem(cfg.n)?;
    let reference = reference_state(cfg.reference, &problem);
    let slots = cfg.max_iters / cfg.record_every + 1;
    let mut series = Vec::new();
    for &num_layers in &cfg.layers {
        let mu = cfg.mu0 / num_layers as f64;
        let opt = OptimizerConfig {
            max_iters: cfg.max_iters,
            step_size: StepSize::Fixed(mu),
            grad_tol: 1e-300,
            gap_tol: 1e-300,
            record_every: 1,
        };
        let init = InitConfig {
            sigma: cfg.sigma,
            num_layers,
            paulis: PauliChoice::RandomUniform,
            seed: cfg.seed,
        };
        let trials = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream_rng(cfg.seed, &[STREAM_CONVERGENCE, trial as u64]);
                let circuit0 = sample_initial_layers(&init, &reference, &mut rng)?;
                let trace = rgd_product(&problem, &circuit0, &opt)?;
                // A run that stops early has hit the floor; hold its last value.
                let mut gaps: Vec<f64> = trace.records.iter().map(|r| r.objective_gap).collect();
                let last = *gaps.last().expect("at least one record");
                gaps.resize(cfg.max_iters + 1, last);
                let hit = gaps.iter().position(|&g| g <= cfg.target_gap);
                Ok((gaps, hit, trace.descent_violations))
            })
            .collect::<Result<Vec<_>, unitary_vqe::Error>>()?;
        let t: Vec<usize> = (0..slots).map(|i| i * cfg.record_every).collect();
        let (mean_gap, std_gap): (Vec<f64>, Vec<f64>) = t
            .iter()
            .map(|&ti| mean_std(&trials.iter().map(|(g, _, _)| g[ti]).collect::<Vec<_>>()))
            .unzip();
        let iterations_to_target: Vec<Option<usize>> = trials.iter().map(|(_, hit, _)| *hit).collect();
        let counts: Vec<f64> = iterations_to_target
            .iter()
            .map(|h| h.map_or(cfg.max_iters as f64 + 1.0, |x| x as f64))
            .collect();
        series.push(ConvergenceSeries {
            num_layers,
            step_size: mu,
            theoretical_rate: theoretical_rate(problem.gap(), problem.h_norm(), mu).ok(),
            mean_initial_gap: mean_gap[0],
            t,
            mean_gap,
            std_gap,
            median_iterations_to_target: median(&counts),
            iterations_to_target,
            descent_violations: trials.iter().map(|(_, _, v)| v).sum(),
        });
    }
    Ok(ConvergenceResult {
        ground_energy: problem.ground_energy(),
        spectral_gap: problem.gap(),
        h_norm: problem.h_norm(),
        series,
    })
}

pub fn convergence_csv(result: &ConvergenceResult) -> CsvTable {
    let mut table = CsvTable::new(&["N", "t", "mean_gap", "std_gap", "theoretical_rate"]);
    for s in &result.series {
        let rate = s.theoretical_rate.map_or("NaN".to_string(), fmt_float);
        for ((t, m), sd) in s.t.iter().zip(&s.mean_gap).zip(&s.std_gap) {
            table.push(&[
                s.num_layers.to_string(),
                t.to_string(),
                fmt_float(*m),
                fmt_float(*sd),
                rate.clone(),
            ]);
        }
    }
    table
}

#[derive(Clone, Debug, Serialize)]
pub struct InitSweepRow {
    pub n: usize,
    pub sigma: f64,
    pub mean_init_gap: f64,
    pub bound: f64,
    pub coverage_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaRange {
    pub n: usize,
    pub ref_gap: f64,
    pub sigma_sq_lo: f64,
    pub sigma_sq_hi: f64,
    pub empty: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InitSweepResult {
    pub rows: Vec<InitSweepRow>,
    /// Admissible `sigma^2` range per `n`, with constants `(1/6, 1/6, 1/6)`.
    pub feasible: Vec<SigmaRange>,
}

pub fn bound_inputs(
    problem: &Problem,
    reference: &StateVector,
    num_layers: usize,
    sigma: f64,
    delta: f64,
) -> InitBoundInputs {
    InitBoundInputs {
        ref_energy: reference.expectation(&problem.h),
        ground_energy: problem.ground_energy(),
        h_norm: problem.h_norm(),
        gap: problem.gap(),
        num_layers,
        sigma,
        delta,
    }
}

/// Initial gaps `g(U^0) - E_0` for each trial. Trial `i` draws the same
/// strings and standard-normal variates for every `sigma`, so the sweep
/// compares scales of one set of directions.
pub fn init_gaps(
    problem: &Problem,
    reference: &StateVector,
    num_layers: usize,
    sigmas: &[f64],
    trials: usize,
    seed: u64,
    stream: &[u64],
) -> Result<Vec<Vec<f64>>, CliError> {
    let n = problem.dim().trailing_zeros() as usize;
    let unit = InitConfig {
        sigma: 1.0,
        num_layers,
        paulis: PauliChoice::RandomUniform,
        seed,
    };
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut path = stream.to_vec();
            path.push(trial as u64);
            let mut rng = stream_rng(seed, &path);
            let rotations = sample_rotations(&unit, n, &mut rng)?;
            Ok(sigmas
                .iter()
                .map(|&sigma| {
                    let scaled: Vec<_> = rotations.iter().map(|(z, p)| (sigma * z, p.clone())).collect();
                    let phi = apply_rotations(&scaled, reference.amplitudes());
                    let hphi = problem.h.mul_vec(&phi);
                    linalg::dot(&phi, &hphi).re - problem.ground_energy()
                })
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>, unitary_vqe::Error>>()?;
    // Transpose to per-sigma lists.
    Ok((0..sigmas.len())
        .map(|s| per_trial.iter().map(|g| g[s]).collect())
        .collect())
}

pub fn run_init_sweep(cfg: &InitSweepConfig) -> Result<InitSweepResult, CliError> {
    let mut rows = Vec::new();
    let mut feasible = Vec::new();
    for &n in &cfg.n_values {
        let problem = tfim_problem(n)?;
        let reference = reference_state(cfg.reference, &problem);
        let gaps = init_gaps(
            &problem,
            &reference,
            cfg.layers,
            &cfg.sigmas,
            cfg.trials,
            cfg.seed,
            &[STREAM_INIT_SWEEP, n as u64],
        )?;
        for (&sigma, trial_gaps) in cfg.sigmas.iter().zip(&gaps) {
            let bound = init_error_bound(&bound_inputs(&problem, &reference, cfg.layers, sigma, cfg.delta))?;
            let covered = trial_gaps.iter().filter(|&&g| g <= bound).count();
            rows.push(InitSweepRow {
                n,
                sigma,
                mean_init_gap: trial_gaps.iter().sum::<f64>() / trial_gaps.len() as f64,
                bound,
                coverage_fraction: covered as f64 / trial_gaps.len() as f64,
            });
        }
        let inputs = bound_inputs(&problem, &reference, cfg.layers, 0.0, cfg.delta);
        let interval = feasible_sigma_interval(&inputs, DEFAULT_SPLIT)?;
        let (lo, hi) = interval.bounds();
        feasible.push(SigmaRange {
            n,
            ref_gap: inputs.ref_energy - inputs.ground_energy,
            sigma_sq_lo: lo,
            sigma_sq_hi: hi,
            empty: matches!(interval, SigmaInterval::Empty { .. }),
        });
    }
    Ok(InitSweepResult { rows, feasible })
}

pub fn init_sweep_csv(result: &InitSweepResult) -> CsvTable {
    let mut table = CsvTable::new(&["n", "sigma", "mean_init_gap", "theorem4_bound", "coverage_fraction"]);
    for r in &result.rows {
        table.push(&[
            r.n.to_string(),
            fmt_float(r.sigma),
            fmt_float(r.mean_init_gap),
            fmt_float(r.bound),
            fmt_float(r.coverage_fraction),
        ]);
    }
    table
}

#[derive(Clone, Debug, Serialize)]
pub struct ShotsRow {
    pub budget: u64,
    pub rms_uniform: f64,
    pub rms_adaptive: f64,
    pub bound_uniform: f64,
    pub bound_adaptive: f64,
    /// Exact RMS noise `sqrt(sum_k alpha_k^2 (1 - <P_k>^2) / M_k)`.
    pub exact_rms_uniform: f64,
    pub exact_rms_adaptive: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShotsResult {
    pub rows: Vec<ShotsRow>,
    pub ground_energy: f64,
    /// Exact energy of the circuit at which shots are taken.
    pub circuit_energy: f64,
    pub coefficients: Vec<f64>,
}

/// Optimizes a random Pauli Hamiltonian, then compares uniform and adaptive
/// shot allocations at the final circuit. Both allocations are sampled from
/// the same random stream within each trial.
pub fn run_shots(cfg: &ShotsConfig) -> Result<ShotsResult, CliError> {
    let mut hrng = stream_rng(cfg.seed, &[STREAM_SHOTS_HAMILTONIAN]);
    let ph = random_pauli_hamiltonian(cfg.n, cfg.terms, &mut hrng)?;
    let problem = Problem::new(reconstruct(&ph)?)?;
    let reference = StateVector::basis(problem.dim(), 0);
    let init = InitConfig {
        sigma: cfg.sigma,
        num_layers: cfg.layers,
        paulis: PauliChoice::RandomUniform,
        seed: cfg.seed,
    };
    let mut irng = stream_rng(cfg.seed, &[STREAM_SHOTS_INIT]);
    let circuit0 = sample_initial_layers(&init, &reference, &mut irng)?;
    let opt = OptimizerConfig {
        max_iters: cfg.opt_iters,
        step_size: StepSize::Fixed(cfg.mu0 / cfg.layers as f64),
        ..OptimizerConfig::default()
    };
    let circuit = rgd_product(&problem, &circuit0, &opt)?.final_circuit;
    let alphas = ph.coefficients();
    let expectations = exact_expectations(&ph, &circuit)?;
    let circuit_energy: f64 = expectations.iter().zip(&alphas).map(|(e, a)| e * a).sum();
    let exact_rms = |shots: &[u64]| -> f64 {
        alphas
            .iter()
            .zip(&expectations)
            .zip(shots)
            .map(|((a, e), &m)| a * a * (1.0 - e * e) / m as f64)
            .sum::<f64>()
            .sqrt()
    };
    let mut rows = Vec::new();
    for (b, &budget) in cfg.budgets.iter().enumerate() {
        let uniform = uniform_allocation(alphas.len(), budget)?;
        let adaptive = adaptive_allocation(&alphas, budget)?;
        let noise = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream_rng(cfg.seed, &[STREAM_SHOTS_TRIAL, b as u64, trial as u64]);
                let u = sample_noisy_objective(&ph, &circuit, &uniform, &mut rng)?.noise;
                let a = sample_noisy_objective(&ph, &circuit, &adaptive, &mut rng)?.noise;
                Ok((u, a))
            })
            .collect::<Result<Vec<_>, unitary_vqe::Error>>()?;
        let rms =
            |f: fn(&(f64, f64)) -> f64| (noise.iter().map(|x| f(x).powi(2)).sum::<f64>() / noise.len() as f64).sqrt();
        rows.push(ShotsRow {
            budget,
            rms_uniform: rms(|x| x.0),
            rms_adaptive: rms(|x| x.1),
            bound_uniform: statistical_error_bound(&alphas, &uniform, cfg.gamma)?,
            bound_adaptive: statistical_error_bound(&alphas, &adaptive, cfg.gamma)?,
            exact_rms_uniform: exact_rms(uniform.shots()),
            exact_rms_adaptive: exact_rms(adaptive.shots()),
        });
    }
    Ok(ShotsResult {
        rows,
        ground_energy: problem.ground_energy(),
        circuit_energy,
        coefficients: alphas,
    })
}

pub fn shots_csv(result: &ShotsResult) -> CsvTable {
    let mut table = CsvTable::new(&[
        "M_tot",
        "rms_error_uniform",
        "rms_error_adaptive",
        "bound_uniform",
        "bound_adaptive",
    ]);
    for r in &result.rows {
        table.push(&[
            r.budget.to_string(),
            fmt_float(r.rms_uniform),
            fmt_float(r.rms_adaptive),
            fmt_float(r.bound_uniform),
            fmt_float(r.bound_adaptive),
        ]);
    }
    table
}

#[derive(Clone, Debug, Serialize)]
pub struct LandscapePoint {
    pub k: usize,
    pub energy: f64,
    pub minimum: bool,
    pub grad_norm: f64,
    pub witness_value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LandscapeResult {
    pub dim: usize,
    pub degeneracy: usize,
    pub gap: f64,
    pub points: Vec<LandscapePoint>,
}

pub fn load_hamiltonian(cfg: &LandscapeConfig) -> Result<PauliHamiltonian, CliError> {
    if cfg.hamiltonian == "tfim" {
        return Ok(tfim(cfg.n)?);
    }
    let text = std::fs::read_to_string(&cfg.hamiltonian).map_err(|e| CliError::Config {
        key: Some("hamiltonian".into()),
        message: format!("cannot read {}: {e}", cfg.hamiltonian),
    })?;
    let ph = PauliHamiltonian::parse_text(&text).map_err(|e| CliError::Config {
        key: Some("hamiltonian".into()),
        message: format!("{}: {e}", cfg.hamiltonian),
    })?;
    if ph.num_qubits() > crate::config::DEFAULT_MAX_QUBITS && !cfg.allow_large {
        return Err(CliError::Config {
            key: Some("hamiltonian".into()),
            message: format!(
                "{} qubits exceeds the default cap; set allow_large = true",
                ph.num_qubits()
            ),
        });
    }
    Ok(ph)
}

/// All critical points `U_k |e_0> = |psi_k>` with gradient norms and
/// Hessian witness values.
pub fn run_landscape(ph: &PauliHamiltonian) -> Result<LandscapeResult, CliError> {
    let h = reconstruct(ph)?;
    let spec = analyze_spectrum_default(&h)?;
    let phi0 = StateVector::basis(spec.dim(), 0);
    let points = classify_critical_points(&spec, &phi0)
        .into_iter()
        .map(|p| {
            let grad = riemannian_gradient_single(&h, &phi0, &p.unitary)?;
            Ok(LandscapePoint {
                k: p.k,
                energy: p.energy,
                minimum: p.kind == CriticalKind::GlobalMinimum,
                grad_norm: grad.norm_sq().sqrt(),
                witness_value: p.witness_value,
            })
        })
        .collect::<Result<Vec<_>, unitary_vqe::Error>>()?;
    Ok(LandscapeResult {
        dim: spec.dim(),
        degeneracy: spec.s,
        gap: spec.gap,
        points,
    })
}

pub fn landscape_report(result: &LandscapeResult) -> String {
    let mut out = format!(
        "# dim {} ground_degeneracy {} gap {}\nk,energy,kind,grad_norm,witness_value\n",
        result.dim,
        result.degeneracy,
        fmt_float(result.gap)
    );
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.k,
            fmt_float(p.energy),
            if p.minimum { "global_minimum" } else { "strict_saddle" },
            fmt_float(p.grad_norm),
            p.witness_value.map_or("-".to_string(), fmt_float)
        ));
    }
    out
}

/// Parses a dense square matrix: one row per line, whitespace-separated
/// entries. Blank lines and lines starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, CliError> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<C64>().map_err(|_| CliError::Config {
                    key: Some("input".into()),
                    message: format!("line {}: cannot parse `{tok}` as a number", idx + 1),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
        return Err(CliError::Config {
            key: Some("input".into()),
            message: format!("matrix row {} has {} entries, expected {dim}", bad + 1, rows[bad].len()),
        });
    }
    Ok(ComplexMatrix::new(dim, dim, rows.concat())?)
}

pub fn run_decompose(matrix: &ComplexMatrix) -> Result<PauliHamiltonian, CliError> {
    Ok(decompose(matrix)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn matrix_parsing() {
        let m = parse_matrix("# comment\n1 0\n\n0 -1+0.5i\n").unwrap();
        assert_eq!(m[(1, 1)], C64::new(-1.0, 0.5));
        assert!(parse_matrix("1 2\n3\n").is_err());
        assert!(parse_matrix("1 x\n0 1\n").is_err());
    }

    #[test]
    fn identity_decomposes_to_one_term() {
        let ph = run_decompose(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(ph.to_text(), "1.0 II\n");
    }

    #[test]
    fn landscape_of_two_level_system() {
        let ph = PauliHamiltonian::from_pairs(1, &[(0.5, "I"), (-0.5, "Z")]).unwrap();
        let r = run_landscape(&ph).unwrap();
        assert_eq!(r.points.len(), 2);
        assert!(r.points[0].minimum && !r.points[1].minimum);
        assert!((r.points[1].witness_value.unwrap() + 2.0).abs() < 1e-12);
        assert!(r.points.iter().all(|p| p.grad_norm < 1e-12));
    }
}
