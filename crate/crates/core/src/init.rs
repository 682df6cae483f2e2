//! Small-angle Pauli-rotation initialization and its error bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::CircuitState;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, C64};
use crate::pauli::{sample_random_pauli, PauliString};

#[derive(Clone, Debug, PartialEq)]
pub enum PauliChoice {
    /// One string per layer, `strings[h]` for layer `h`.
    Fixed(Vec<PauliString>),
    /// Each layer draws a string uniformly from all `4^n` (identity included).
    RandomUniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    /// Standard deviation of the rotation angles, in radians.
    pub sigma: f64,
    pub num_layers: usize,
    pub paulis: PauliChoice,
    pub seed: u64,
}

impl InitConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if self.num_layers == 0 {
            return Err(Error::InvalidArgument("need at least one layer".into()));
        }
        if let PauliChoice::Fixed(list) = &self.paulis {
            if list.len() != self.num_layers {
                return Err(Error::InvalidArgument(format!(
                    "{} Pauli strings given for {} layers",
                    list.len(),
                    self.num_layers
                )));
            }
            if let Some(p) = list.iter().find(|p| p.num_qubits() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.num_qubits(),
                });
            }
        }
        Ok(())
    }
}

/// `exp(-i theta P) = cos(theta) I - i sin(theta) P`.
pub fn rotation_layer(theta: f64, p: &PauliString) -> Result<ComplexMatrix> {
    let mut layer = p.dense()?.scale(C64::new(0.0, -theta.sin()));
    let c = theta.cos();
    for i in 0..layer.rows() {
        layer[(i, i)] += c;
    }
    Ok(layer)
}

/// Angles and strings for each layer. Each layer draws its string (if
/// random) and then its angle, so a fixed seed gives a fixed sequence.
pub fn sample_rotations<R: Rng + ?Sized>(cfg: &InitConfig, n: usize, rng: &mut R) -> Result<Vec<(f64, PauliString)>> {
    cfg.validate(n)?;
    Ok((0..cfg.num_layers)
        .map(|h| {
            let p = match &cfg.paulis {
                PauliChoice::Fixed(list) => list[h].clone(),
                PauliChoice::RandomUniform => sample_random_pauli(n, rng),
            };
            let z: f64 = rng.sample(StandardNormal);
            (cfg.sigma * z, p)
        })
        .collect())
}

fn qubits_of(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NonPowerOfTwoDim { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Random initial circuit acting on `reference`.
pub fn sample_initial_layers<R: Rng + ?Sized>(
    cfg: &InitConfig,
    reference: &StateVector,
    rng: &mut R,
) -> Result<CircuitState> {
    let n = qubits_of(reference.dim())?;
    let layers = sample_rotations(cfg, n, rng)?
        .iter()
        .map(|(theta, p)| rotation_layer(*theta, p))
        .collect::<Result<Vec<_>>>()?;
    CircuitState::new(layers, reference.clone())
}

/// `U_1 ... U_N |reference>` for rotation layers, without forming matrices.
pub fn apply_rotations(rotations: &[(f64, PauliString)], reference: &[C64]) -> Vec<C64> {
    rotations.iter().rev().fold(reference.to_vec(), |v, (theta, p)| {
        let (s, c) = theta.sin_cos();
        let pv = p.apply(&v);
        v.iter().zip(&pv).map(|(a, b)| a * c + b * C64::new(0.0, -s)).collect()
    })
}

/// [`sample_initial_layers`] driven by `cfg.seed`.
pub fn sample_initial_layers_seeded(cfg: &InitConfig, reference: &StateVector) -> Result<CircuitState> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    sample_initial_layers(cfg, reference, &mut rng)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitBoundInputs {
    /// `<phi_0|H|phi_0>`.
    pub ref_energy: f64,
    pub ground_energy: f64,
    pub h_norm: f64,
    pub gap: f64,
    pub num_layers: usize,
    pub sigma: f64,
    /// Failure probability.
    pub delta: f64,
}

impl InitBoundInputs {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.ref_energy,
            self.ground_energy,
            self.h_norm,
            self.gap,
            self.sigma,
            self.delta,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        if self.ref_energy < self.ground_energy - 1e-9 {
            return Err(Error::InvalidArgument(
                "reference energy lies below the ground energy".into(),
            ));
        }
        if self.h_norm < self.ground_energy.abs() - 1e-12 {
            return Err(Error::InvalidArgument("operator norm is smaller than |E_0|".into()));
        }
        if self.num_layers == 0 {
            return Err(Error::InvalidArgument("need at least one layer".into()));
        }
        if self.sigma < 0.0 {
            return Err(Error::InvalidArgument("sigma must be non-negative".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// `((1 + exp(-2 sigma^2)) / 2)^N`.
    pub fn contraction(&self) -> f64 {
        contraction_factor(self.sigma * self.sigma, self.num_layers)
    }

    fn terms(&self, sigma_sq: f64) -> [f64; 3] {
        let a_n = contraction_factor(sigma_sq, self.num_layers);
        [
            a_n * (self.ref_energy - self.ground_energy),
            (1.0 - a_n) * (self.h_norm - self.ground_energy),
            2.0 * self.h_norm * sigma_sq.sqrt() * (2.0 * self.num_layers as f64 * (2.0 / self.delta).ln()).sqrt(),
        ]
    }
}

fn contraction_factor(sigma_sq: f64, num_layers: usize) -> f64 {
    ((1.0 + (-2.0 * sigma_sq).exp()) / 2.0).powi(num_layers as i32)
}

/// High-probability upper bound on `g(U^0) - E_0`.
pub fn init_error_bound(inputs: &InitBoundInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.terms(inputs.sigma * inputs.sigma).iter().sum())
}

/// Whether each of the three bound terms stays below `c_i Delta_1` at the
/// given `sigma^2`, evaluated without approximation.
pub fn sigma_conditions(inputs: &InitBoundInputs, c: [f64; 3], sigma_sq: f64) -> [bool; 3] {
    let terms = inputs.terms(sigma_sq);
    [0, 1, 2].map(|i| terms[i] <= c[i] * inputs.gap)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaInterval {
    /// Admissible `sigma^2` values `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// The lower end exceeds the upper end.
    Empty { lo: f64, hi: f64 },
}

impl SigmaInterval {
    pub fn is_empty(&self) -> bool {
        matches!(self, SigmaInterval::Empty { .. })
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            SigmaInterval::Interval { lo, hi } | SigmaInterval::Empty { lo, hi } => (lo, hi),
        }
    }

    pub fn contains(&self, sigma_sq: f64) -> bool {
        match *self {
            SigmaInterval::Interval { lo, hi } => lo <= sigma_sq && sigma_sq <= hi,
            SigmaInterval::Empty { .. } => false,
        }
    }
}

pub const DEFAULT_SPLIT: [f64; 3] = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];

fn check_split(c: [f64; 3]) -> Result<()> {
    if c.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidConstants(format!(
            "constants must be positive, got {c:?}"
        )));
    }
    let sum: f64 = c.iter().sum();
    if (sum - 0.5).abs() > 1e-12 {
        return Err(Error::InvalidConstants(format!("constants sum to {sum}, expected 1/2")));
    }
    Ok(())
}

/// Range of `sigma^2` for which all three terms of the bound stay below
/// `c_i Delta_1`, using `A^N ~ exp(-N sigma^2)`.
pub fn feasible_sigma_interval(inputs: &InitBoundInputs, c: [f64; 3]) -> Result<SigmaInterval> {
    check_split(c)?;
    inputs.validate()?;
    if !(inputs.gap > 0.0) {
        return Err(Error::InvalidArgument("gap must be positive".into()));
    }
    let n = inputs.num_layers as f64;
    let e_ref = inputs.ref_energy - inputs.ground_energy;
    let lo = if e_ref > 0.0 {
        ((e_ref / (c[0] * inputs.gap)).ln() / n).max(0.0)
    } else {
        0.0
    };
    let width = inputs.h_norm - inputs.ground_energy;
    let hi_mix = if width > c[1] * inputs.gap {
        (width / (width - c[1] * inputs.gap)).ln() / n
    } else {
        f64::INFINITY
    };
    let hi_noise =
        c[2] * c[2] * inputs.gap * inputs.gap / (8.0 * n * inputs.h_norm * inputs.h_norm * (2.0 / inputs.delta).ln());
    let hi = hi_mix.min(hi_noise);
    Ok(if lo <= hi {
        SigmaInterval::Interval { lo, hi }
    } else {
        SigmaInterval::Empty { lo, hi }
    })
}

/// Largest contiguous run of grid points in `[0, max_sigma_sq]` where all
/// three conditions hold without approximation, as `(lo, hi)`.
pub fn feasible_sigma_grid(
    inputs: &InitBoundInputs,
    c: [f64; 3],
    max_sigma_sq: f64,
    points: usize,
) -> Result<Option<(f64, f64)>> {
    check_split(c)?;
    inputs.validate()?;
    let points = points.max(2);
    let mut best: Option<(f64, f64)> = None;
    let mut start: Option<f64> = None;
    let mut last = 0.0;
    for i in 0..points {
        let s2 = max_sigma_sq * i as f64 / (points - 1) as f64;
        let ok = sigma_conditions(inputs, c, s2).iter().all(|&b| b);
        if ok {
            start.get_or_insert(s2);
            last = s2;
        }
        if !ok || i + 1 == points {
            if let Some(s) = start.take() {
                if best.is_none_or(|(a, b)| last - s > b - a) {
                    best = Some((s, last));
                }
            }
        }
    }
    Ok(best)
}

fn pauli_left_mul(p: &PauliString, m: &ComplexMatrix) -> ComplexMatrix {
    let columns: Vec<Vec<C64>> = (0..m.cols()).map(|c| p.apply(&m.column(c))).collect();
    ComplexMatrix::from_columns(&columns).expect("columns share a length")
}

/// `E[g(U^0)]` over the angles for fixed strings, from the recursion
/// `H_k = alpha H_{k-1} + beta P_k H_{k-1} P_k` with `P_1` the first layer.
pub fn expected_initial_energy(
    h: &ComplexMatrix,
    phi0: &StateVector,
    paulis: &[PauliString],
    sigma: f64,
) -> Result<f64> {
    let dim = h.require_square()?;
    if dim != phi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi0.dim(),
            found: dim,
        });
    }
    let n = qubits_of(dim)?;
    if let Some(p) = paulis.iter().find(|p| p.num_qubits() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.num_qubits(),
        });
    }
    let e = (-2.0 * sigma * sigma).exp();
    let alpha = (1.0 + e) / 2.0;
    let beta = (1.0 - e) / 2.0;
    let mut hk = h.clone();
    for p in paulis {
        // P H P = P (P H)^H for Hermitian H.
        let php = pauli_left_mul(p, &pauli_left_mul(p, &hk).adjoint());
        hk = &hk.scale_real(alpha) + &php.scale_real(beta);
    }
    Ok(phi0.expectation(&hk))
}

/// [`expected_initial_energy`] with the first `num_layers` strings.
pub fn empirical_expectation_recursion(
    h: &ComplexMatrix,
    phi0: &StateVector,
    paulis: &[PauliString],
    sigma: f64,
    num_layers: usize,
) -> Result<f64> {
    if paulis.len() < num_layers {
        return Err(Error::InvalidArgument(format!(
            "{} Pauli strings given for {} layers",
            paulis.len(),
            num_layers
        )));
    }
    expected_initial_energy(h, phi0, &paulis[..num_layers], sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> InitBoundInputs {
        InitBoundInputs {
            ref_energy: -0.7,
            ground_energy: -1.0,
            h_norm: 1.0,
            gap: 1.0,
            num_layers: 4,
            sigma: 0.1,
            delta: 0.1,
        }
    }

    #[test]
    fn zero_sigma_gives_identity_layers() {
        let cfg = InitConfig {
            sigma: 0.0,
            num_layers: 3,
            paulis: PauliChoice::RandomUniform,
            seed: 7,
        };
        let c = sample_initial_layers_seeded(&cfg, &StateVector::basis(4, 0)).unwrap();
        for layer in c.layers() {
            assert!(*layer == ComplexMatrix::identity(4));
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let cfg = InitConfig {
            sigma: 0.3,
            num_layers: 5,
            paulis: PauliChoice::RandomUniform,
            seed: 11,
        };
        let r = StateVector::basis(8, 0);
        assert_eq!(
            sample_initial_layers_seeded(&cfg, &r).unwrap(),
            sample_initial_layers_seeded(&cfg, &r).unwrap()
        );
    }

    #[test]
    fn fixed_list_length_checked() {
        let cfg = InitConfig {
            sigma: 0.1,
            num_layers: 2,
            paulis: PauliChoice::Fixed(vec!["XZ".parse().unwrap()]),
            seed: 0,
        };
        assert!(sample_initial_layers_seeded(&cfg, &StateVector::basis(4, 0)).is_err());
    }

    #[test]
    fn bound_at_zero_sigma() {
        let i = InitBoundInputs { sigma: 0.0, ..inputs() };
        assert!((init_error_bound(&i).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn split_must_sum_to_half() {
        assert!(matches!(
            feasible_sigma_interval(&inputs(), [0.2, 0.2, 0.2]),
            Err(Error::InvalidConstants(_))
        ));
    }

    #[test]
    fn interval_starts_at_zero_for_good_reference() {
        let i = InitBoundInputs {
            ref_energy: -1.0 + 0.1,
            ..inputs()
        };
        let iv = feasible_sigma_interval(&i, DEFAULT_SPLIT).unwrap();
        assert_eq!(iv.bounds().0, 0.0);
        assert!(!iv.is_empty());
    }

    #[test]
    fn tiny_delta_empties_interval() {
        let i = InitBoundInputs {
            ref_energy: -1.0 + 0.2,
            delta: 1e-300,
            ..inputs()
        };
        let iv = feasible_sigma_interval(&i, DEFAULT_SPLIT).unwrap();
        assert!(iv.bounds().0 > 0.0);
        assert!(iv.is_empty());
    }

    #[test]
    fn recursion_without_noise_is_reference_energy() {
        let h = ComplexMatrix::from_diag(&[0.5, -1.0, 2.0, 0.0]);
        let phi = StateVector::basis(4, 2);
        let ps: Vec<PauliString> = vec!["XY".parse().unwrap(), "ZI".parse().unwrap()];
        assert!((empirical_expectation_recursion(&h, &phi, &ps, 0.0, 2).unwrap() - 2.0).abs() < 1e-15);
        // ZI is diagonal and commutes with H.
        let v = empirical_expectation_recursion(&h, &phi, &ps[1..], 0.7, 1).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }
}
