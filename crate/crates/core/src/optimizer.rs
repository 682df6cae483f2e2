//! Riemannian gradient descent for single unitaries and unitary products.

use crate::circuit::{CircuitState, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::hamiltonian::{analyze_spectrum_default, SpectralData};
use crate::linalg::{ComplexMatrix, StateVector, HERMITIAN_TOL};
use crate::manifold::layer_gradients;

/// Slack allowed on the per-step descent inequality.
pub const DESCENT_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    /// `1 / ((8N + 1) ||H||)`.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub step_size: StepSize,
    /// Stop once `sum_h ||grad_h||_F^2 < grad_tol^2`.
    pub grad_tol: f64,
    /// Stop once `f - E_0 < gap_tol`.
    pub gap_tol: f64,
    pub record_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            step_size: StepSize::Auto,
            grad_tol: 1e-10,
            gap_tol: 1e-8,
            record_every: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0 && self.gap_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if let StepSize::Fixed(mu) = self.step_size {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidArgument(format!("step size must be positive, got {mu}")));
            }
        }
        Ok(())
    }

    pub fn resolve_step(&self, h_norm: f64, num_layers: usize) -> f64 {
        match self.step_size {
            StepSize::Auto => default_step_size(h_norm, num_layers),
            StepSize::Fixed(mu) => mu,
        }
    }
}

/// A Hamiltonian together with its exact spectrum.
#[derive(Clone, Debug)]
pub struct Problem {
    pub h: ComplexMatrix,
    pub spectrum: SpectralData,
}

impl Problem {
    pub fn new(h: ComplexMatrix) -> Result<Self> {
        let spectrum = analyze_spectrum_default(&h)?;
        Ok(Self { h, spectrum })
    }

    pub fn ground_energy(&self) -> f64 {
        self.spectrum.ground_energy()
    }

    pub fn h_norm(&self) -> f64 {
        self.spectrum.operator_norm()
    }

    pub fn gap(&self) -> f64 {
        self.spectrum.gap
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// `f - E_0`.
    pub objective_gap: f64,
    pub grad_norm_sq: f64,
    /// `gap_{t+1} / gap_t`; `None` for the last iterate or when `gap_t <= 0`.
    pub certificate_ratio: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    GapTolerance,
    GradientTolerance,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Number of updates performed.
    pub iterations: usize,
    pub step_size: f64,
    /// `None` when the rate formula is not positive for this step size.
    pub theoretical_rate: Option<f64>,
    /// Largest `gap_{t+1} / gap_t` over all steps with `gap_t > 0`.
    pub max_certificate_ratio: Option<f64>,
    /// Steps where the objective rose by more than [`DESCENT_SLACK`].
    pub descent_violations: usize,
    pub initial_gap: f64,
    pub final_gap: f64,
    pub final_circuit: CircuitState,
}

impl RunTrace {
    /// Set when the objective increased beyond the slack at least once,
    /// which usually means the step size is too large.
    pub fn step_size_too_large(&self) -> bool {
        self.descent_violations > 0
    }

    pub fn final_unitarity_defect(&self) -> f64 {
        self.final_circuit
            .layers()
            .iter()
            .map(ComplexMatrix::unitarity_defect)
            .fold(0.0, f64::max)
    }
}

pub fn default_step_size(h_norm: f64, num_layers: usize) -> f64 {
    1.0 / ((8 * num_layers + 1) as f64 * h_norm)
}

/// Linear rate `1 - Delta_1^2 mu / (32 ||H||)`.
pub fn theoretical_rate(gap: f64, h_norm: f64, mu: f64) -> Result<f64> {
    let rate = 1.0 - gap * gap * mu / (32.0 * h_norm);
    if !(rate > 0.0) {
        return Err(Error::RateOutOfRange { value: rate });
    }
    Ok(rate.min(1.0 - f64::EPSILON))
}

/// Whether the objective gap is within the local convergence region
/// `f - E_0 <= Delta_1 / 2`.
pub fn in_basin(objective_gap: f64, gap: f64) -> bool {
    objective_gap <= gap / 2.0
}

/// `ceil(d_target / p)` layers are needed when each layer contributes at
/// most `p` real parameters.
pub fn required_depth(d_target: u64, p: u64) -> Result<u64> {
    if p == 0 {
        return Err(Error::InvalidArgument("parameters per layer must be at least 1".into()));
    }
    Ok(d_target.div_ceil(p))
}

fn check_inputs(problem: &Problem, circuit: &CircuitState, cfg: &OptimizerConfig) -> Result<()> {
    cfg.validate()?;
    let deviation = problem.h.hermiticity_defect();
    if deviation > HERMITIAN_TOL * problem.h.frobenius_norm().max(1.0) {
        return Err(Error::NonHermitian { deviation });
    }
    if circuit.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: circuit.dim(),
        });
    }
    circuit.check_unitary(UNITARY_TOL)
}

/// RGD on `f(U) = <phi_0|U^H H U|phi_0>`.
pub fn rgd_single(
    problem: &Problem,
    phi0: &StateVector,
    u0: &ComplexMatrix,
    cfg: &OptimizerConfig,
) -> Result<RunTrace> {
    let circuit = CircuitState::new(vec![u0.clone()], phi0.clone())?;
    rgd_product(problem, &circuit, cfg)
}

/// RGD on the product objective, updating every layer from gradients taken
/// at the same iterate.
pub fn rgd_product(problem: &Problem, circuit0: &CircuitState, cfg: &OptimizerConfig) -> Result<RunTrace> {
    rgd_product_observed(problem, circuit0, cfg, |_, _| {})
}

/// [`rgd_product`] that also hands every recorded iterate to `observe`.
pub fn rgd_product_observed(
    problem: &Problem,
    circuit0: &CircuitState,
    cfg: &OptimizerConfig,
    mut observe: impl FnMut(usize, &CircuitState),
) -> Result<RunTrace> {
    check_inputs(problem, circuit0, cfg)?;
    let mu = cfg.resolve_step(problem.h_norm(), circuit0.num_layers());
    let e0 = problem.ground_energy();
    let mut circuit = circuit0.clone();
    let mut records = Vec::new();
    let mut prev_gap: Option<f64> = None;
    let mut max_ratio: Option<f64> = None;
    let mut violations = 0;
    let mut initial_gap = f64::NAN;
    let mut t = 0;
    let (stop_reason, final_gap) = loop {
        let grads = layer_gradients(&problem.h, &circuit);
        let gap = grads.objective - e0;
        let grad_norm_sq = grads.norm_sq();
        if t == 0 {
            initial_gap = gap;
        }
        if let Some(prev) = prev_gap {
            if gap > prev + DESCENT_SLACK {
                violations += 1;
            }
            if prev > 0.0 {
                let ratio = gap / prev;
                max_ratio = Some(max_ratio.map_or(ratio, |m: f64| m.max(ratio)));
                if let Some(last) = records.last_mut() {
                    let last: &mut IterationRecord = last;
                    if last.t + 1 == t {
                        last.certificate_ratio = Some(ratio);
                    }
                }
            }
        }
        let stop = if gap < cfg.gap_tol {
            Some(StopReason::GapTolerance)
        } else if grad_norm_sq < cfg.grad_tol * cfg.grad_tol {
            Some(StopReason::GradientTolerance)
        } else if t >= cfg.max_iters {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if t % cfg.record_every == 0 || stop.is_some() {
            records.push(IterationRecord {
                t,
                objective_gap: gap,
                grad_norm_sq,
                certificate_ratio: None,
            });
            observe(t, &circuit);
        }
        if let Some(reason) = stop {
            break (reason, gap);
        }
        for (layer, gen) in circuit.layers_mut().iter_mut().zip(&grads.generators) {
            *layer = gen.retract(-mu, layer);
        }
        prev_gap = Some(gap);
        t += 1;
    };
    Ok(RunTrace {
        records,
        converged: stop_reason != StopReason::MaxIterations,
        stop_reason,
        iterations: t,
        step_size: mu,
        theoretical_rate: theoretical_rate(problem.gap(), problem.h_norm(), mu).ok(),
        max_certificate_ratio: max_ratio,
        descent_violations: violations,
        initial_gap,
        final_gap,
        final_circuit: circuit,
    })
}
