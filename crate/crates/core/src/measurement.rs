//! Finite-shot estimation of Pauli-decomposed energies.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::CircuitState;
use crate::error::{Error, Result};
use crate::optimizer::{rgd_product_observed, OptimizerConfig, Problem, RunTrace};
use crate::pauli::PauliHamiltonian;

/// Shots per Hamiltonian term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotAllocation {
    shots: Vec<u64>,
}

impl ShotAllocation {
    pub fn new(shots: Vec<u64>) -> Result<Self> {
        if shots.is_empty() {
            return Err(Error::InvalidArgument("allocation needs at least one term".into()));
        }
        if shots.contains(&0) {
            return Err(Error::InvalidArgument("every term needs at least one shot".into()));
        }
        Ok(Self { shots })
    }

    pub fn shots(&self) -> &[u64] {
        &self.shots
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.shots.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyEstimate {
    pub value: f64,
    /// `value` minus the exact energy.
    pub noise: f64,
    /// `(number of +1 outcomes, shots)` per term.
    pub per_term: Vec<(u64, u64)>,
}

fn check_dims(ph: &PauliHamiltonian, circuit: &CircuitState) -> Result<()> {
    if ph.dim() != circuit.dim() {
        return Err(Error::DimensionMismatch {
            expected: ph.dim(),
            found: circuit.dim(),
        });
    }
    Ok(())
}

/// `<phi_N|P_k|phi_N>` for every term, in term order.
pub fn exact_expectations(ph: &PauliHamiltonian, circuit: &CircuitState) -> Result<Vec<f64>> {
    check_dims(ph, circuit)?;
    let phi = circuit.output_state();
    Ok(ph.terms().iter().map(|t| t.string.expectation(&phi)).collect())
}

pub fn uniform_allocation(num_terms: usize, budget: u64) -> Result<ShotAllocation> {
    if num_terms == 0 {
        return Err(Error::InvalidArgument("no terms to allocate shots to".into()));
    }
    let l = num_terms as u64;
    if budget < l {
        return Err(Error::BudgetTooSmall {
            budget,
            terms: num_terms,
        });
    }
    let base = budget / l;
    let extra = (budget % l) as usize;
    ShotAllocation::new((0..num_terms).map(|k| base + u64::from(k < extra)).collect())
}

/// Shots proportional to `|alpha_k|`, rounded by largest remainder with at
/// least one shot per term.
pub fn adaptive_allocation(alphas: &[f64], budget: u64) -> Result<ShotAllocation> {
    let num_terms = alphas.len();
    if num_terms == 0 {
        return Err(Error::InvalidArgument("no terms to allocate shots to".into()));
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite);
    }
    if budget < num_terms as u64 {
        return Err(Error::BudgetTooSmall {
            budget,
            terms: num_terms,
        });
    }
    let weights: Vec<f64> = alphas.iter().map(|a| a.abs()).collect();
    let sum: f64 = weights.iter().sum();
    if sum == 0.0 {
        return Err(Error::AllZeroCoefficients);
    }
    let max = weights.iter().cloned().fold(0.0, f64::max);
    let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min <= 1e-12 * max {
        return uniform_allocation(num_terms, budget);
    }
    let targets: Vec<f64> = weights.iter().map(|w| w / sum * budget as f64).collect();
    let mut shots: Vec<u64> = targets.iter().map(|t| (t.floor() as u64).max(1)).collect();
    let mut assigned: u64 = shots.iter().sum();
    while assigned < budget {
        let k = (0..num_terms)
            .max_by(|&i, &j| {
                let ri = targets[i] - shots[i] as f64;
                let rj = targets[j] - shots[j] as f64;
                ri.total_cmp(&rj).then(j.cmp(&i))
            })
            .expect("at least one term");
        shots[k] += 1;
        assigned += 1;
    }
    while assigned > budget {
        let k = (0..num_terms)
            .filter(|&i| shots[i] > 1)
            .max_by(|&i, &j| {
                let ei = shots[i] as f64 - targets[i];
                let ej = shots[j] as f64 - targets[j];
                ei.total_cmp(&ej).then(j.cmp(&i))
            })
            .expect("budget covers one shot per term");
        shots[k] -= 1;
        assigned -= 1;
    }
    ShotAllocation::new(shots)
}

/// `sqrt(sum_k alpha_k^2 / M_k)`.
pub fn allocation_variance_proxy(alphas: &[f64], alloc: &ShotAllocation) -> Result<f64> {
    if alphas.len() != alloc.len() {
        return Err(Error::DimensionMismatch {
            expected: alphas.len(),
            found: alloc.len(),
        });
    }
    Ok(alphas
        .iter()
        .zip(alloc.shots())
        .map(|(a, &m)| a * a / m as f64)
        .sum::<f64>()
        .sqrt())
}

/// Deviation `sqrt(2 ln(1/gamma)) sqrt(sum_k alpha_k^2 / M_k)` that the
/// estimate exceeds with probability at most `gamma`.
pub fn statistical_error_bound(alphas: &[f64], alloc: &ShotAllocation, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok((2.0 * (1.0 / gamma).ln()).sqrt() * allocation_variance_proxy(alphas, alloc)?)
}

fn sample_from_expectations<R: Rng + ?Sized>(
    alphas: &[f64],
    expectations: &[f64],
    alloc: &ShotAllocation,
    rng: &mut R,
) -> (f64, Vec<(u64, u64)>) {
    let mut value = 0.0;
    let mut per_term = Vec::with_capacity(alphas.len());
    for ((alpha, exp), &m) in alphas.iter().zip(expectations).zip(alloc.shots()) {
        let p_plus = ((1.0 + exp) / 2.0).clamp(0.0, 1.0);
        let plus = Binomial::new(m, p_plus)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        value += alpha * (2.0 * plus as f64 / m as f64 - 1.0);
        per_term.push((plus, m));
    }
    (value, per_term)
}

/// Shot-noise estimate of the energy: each term `k` is measured `M_k` times
/// and contributes `alpha_k (2 f_k / M_k - 1)`.
pub fn sample_noisy_objective<R: Rng + ?Sized>(
    ph: &PauliHamiltonian,
    circuit: &CircuitState,
    alloc: &ShotAllocation,
    rng: &mut R,
) -> Result<NoisyEstimate> {
    if alloc.len() != ph.len() {
        return Err(Error::DimensionMismatch {
            expected: ph.len(),
            found: alloc.len(),
        });
    }
    let expectations = exact_expectations(ph, circuit)?;
    let alphas = ph.coefficients();
    let exact: f64 = alphas.iter().zip(&expectations).map(|(a, e)| a * e).sum();
    let (value, per_term) = sample_from_expectations(&alphas, &expectations, alloc, rng);
    Ok(NoisyEstimate {
        value,
        noise: value - exact,
        per_term,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyRecord {
    pub t: usize,
    /// Exact `g - E_0`.
    pub exact_gap: f64,
    /// Shot-noise estimate of `g`.
    pub estimate: f64,
}

#[derive(Clone, Debug)]
pub struct NoisyTrace {
    pub trace: RunTrace,
    pub records: Vec<NoisyRecord>,
    /// Predicted noise floor, [`statistical_error_bound`] for the allocation.
    pub noise_floor: f64,
    /// First recorded iteration whose exact gap is below 10% of the noise
    /// floor; iterations from here on count as steady state.
    pub steady_state_start: Option<usize>,
    pub ground_energy: f64,
}

impl NoisyTrace {
    /// `|estimate - E_0|` for the steady-state records.
    pub fn steady_state_errors(&self) -> Vec<f64> {
        match self.steady_state_start {
            Some(start) => self
                .records
                .iter()
                .filter(|r| r.t >= start)
                .map(|r| (r.estimate - self.ground_energy).abs())
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn final_estimate_error(&self) -> f64 {
        self.records
            .last()
            .map_or(f64::NAN, |r| (r.estimate - self.ground_energy).abs())
    }
}

/// Gradient descent with exact gradients whose reported objective at each
/// recorded iterate is a shot-noise estimate.
pub fn rgd_noisy<R: Rng + ?Sized>(
    ph: &PauliHamiltonian,
    problem: &Problem,
    circuit0: &CircuitState,
    cfg: &OptimizerConfig,
    alloc: &ShotAllocation,
    gamma: f64,
    rng: &mut R,
) -> Result<NoisyTrace> {
    if ph.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: ph.dim(),
        });
    }
    if alloc.len() != ph.len() {
        return Err(Error::DimensionMismatch {
            expected: ph.len(),
            found: alloc.len(),
        });
    }
    check_dims(ph, circuit0)?;
    let alphas = ph.coefficients();
    let noise_floor = statistical_error_bound(&alphas, alloc, gamma)?;
    let e0 = problem.ground_energy();
    let mut records = Vec::new();
    let trace = rgd_product_observed(problem, circuit0, cfg, |t, circuit| {
        let phi = circuit.output_state();
        let expectations: Vec<f64> = ph.terms().iter().map(|term| term.string.expectation(&phi)).collect();
        let exact: f64 = alphas.iter().zip(&expectations).map(|(a, e)| a * e).sum();
        let (estimate, _) = sample_from_expectations(&alphas, &expectations, alloc, rng);
        records.push(NoisyRecord {
            t,
            exact_gap: exact - e0,
            estimate,
        });
    })?;
    let steady_state_start = records.iter().find(|r| r.exact_gap <= 0.1 * noise_floor).map(|r| r.t);
    Ok(NoisyTrace {
        trace,
        records,
        noise_floor,
        steady_state_start,
        ground_energy: e0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_allocation(3, 9).unwrap().shots(), &[3, 3, 3]);
        assert_eq!(uniform_allocation(3, 10).unwrap().shots(), &[4, 3, 3]);
        assert!(matches!(
            uniform_allocation(5, 4),
            Err(Error::BudgetTooSmall { budget: 4, terms: 5 })
        ));
    }

    #[test]
    fn adaptive_examples() {
        assert_eq!(adaptive_allocation(&[1.0, 1.0], 100).unwrap().shots(), &[50, 50]);
        assert_eq!(adaptive_allocation(&[3.0, 1.0], 100).unwrap().shots(), &[75, 25]);
        assert_eq!(adaptive_allocation(&[0.9, 0.1, 0.1], 11).unwrap().shots(), &[9, 1, 1]);
        assert_eq!(
            adaptive_allocation(&[1.0, -1.0, 1.0], 10).unwrap(),
            uniform_allocation(3, 10).unwrap()
        );
        assert!(matches!(
            adaptive_allocation(&[0.0, 0.0], 10),
            Err(Error::AllZeroCoefficients)
        ));
        assert!(matches!(
            adaptive_allocation(&[1.0, 2.0], 1),
            Err(Error::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn adaptive_respects_floor_of_one() {
        let a = adaptive_allocation(&[100.0, 0.0, 0.001], 5).unwrap();
        assert_eq!(a.total(), 5);
        assert!(a.shots().iter().all(|&m| m >= 1));
        assert_eq!(a.shots()[0], 3);
    }

    #[test]
    fn bound_examples() {
        let one = ShotAllocation::new(vec![1]).unwrap();
        let b = statistical_error_bound(&[1.0], &one, (-1.0f64).exp()).unwrap();
        assert!((b - 2f64.sqrt()).abs() < 1e-15);
        let a = ShotAllocation::new(vec![10, 20]).unwrap();
        let a2 = ShotAllocation::new(vec![20, 40]).unwrap();
        let r = statistical_error_bound(&[1.0, 0.5], &a, 0.1).unwrap()
            / statistical_error_bound(&[1.0, 0.5], &a2, 0.1).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(statistical_error_bound(&[1.0], &one, 1.0).is_err());
    }

    #[test]
    fn deterministic_outcomes_have_no_noise() {
        let ph = PauliHamiltonian::from_pairs(2, &[(0.5, "ZI"), (-0.25, "IZ"), (1.5, "ZZ")]).unwrap();
        let c = CircuitState::identity(1, StateVector::basis(4, 0));
        let alloc = uniform_allocation(3, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = sample_noisy_objective(&ph, &c, &alloc, &mut rng).unwrap();
        assert_eq!(est.value, 1.75);
        assert_eq!(est.noise, 0.0);
        assert_eq!(est.per_term, vec![(10, 10); 3]);
    }

    #[test]
    fn expectations_of_basis_state() {
        let ph = PauliHamiltonian::from_pairs(1, &[(1.0, "Z"), (1.0, "X")]).unwrap();
        let c = CircuitState::identity(1, StateVector::basis(2, 0));
        assert_eq!(exact_expectations(&ph, &c).unwrap(), vec![1.0, 0.0]);
        let wrong = CircuitState::identity(1, StateVector::basis(4, 0));
        assert!(matches!(
            exact_expectations(&ph, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
