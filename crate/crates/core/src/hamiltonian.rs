//! Problem construction and spectral analysis.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{CircuitState, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, ComplexMatrix, StateVector, C64};
use crate::pauli::{sample_random_pauli, PauliHamiltonian, PauliString, PauliTerm};

/// Exact spectrum of a Hermitian matrix together with its ground-space data.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Eigenvalues in ascending order.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `energies`.
    pub eigvecs: ComplexMatrix,
    /// Number of eigenvalues within `cluster_tol` of the ground energy; the
    /// index of the first excited level.
    pub s: usize,
    /// Spectral gap `E_s - E_0`.
    pub gap: f64,
    /// Projector onto the ground space.
    pub ground_projector: ComplexMatrix,
    pub cluster_tol: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// `max_k |E_k|`, the operator norm of the Hermitian matrix.
    pub fn operator_norm(&self) -> f64 {
        self.energies
            .first()
            .map(|e| e.abs())
            .unwrap_or(0.0)
            .max(self.energies.last().map(|e| e.abs()).unwrap_or(0.0))
    }

    pub fn eigvec(&self, k: usize) -> Vec<C64> {
        self.eigvecs.column(k)
    }

    /// Weight of `phi` outside the ground space, `||(I - P_0) phi||^2`.
    pub fn excited_weight(&self, phi: &[C64]) -> f64 {
        let ground: f64 = (0..self.s)
            .map(|k| {
                let v = self.eigvecs.column(k);
                linalg::dot(&v, phi).norm_sqr()
            })
            .sum();
        (linalg::norm_sq(phi) - ground).clamp(0.0, 1.0)
    }
}

/// Default clustering tolerance `1e-8 * max(1, ||H||)`.
pub fn default_cluster_tol(h_norm: f64) -> f64 {
    1e-8 * h_norm.max(1.0)
}

/// Diagonalizes `h` and extracts the ground degeneracy and spectral gap.
pub fn analyze_spectrum(h: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralData> {
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cluster tolerance must be positive, got {cluster_tol}"
        )));
    }
    let eig = herm_eig(h)?;
    let dim = eig.values.len();
    if dim == 0 {
        return Err(Error::GaplessSpectrum { tol: cluster_tol });
    }
    let e0 = eig.values[0];
    let s = eig
        .values
        .iter()
        .position(|&e| e - e0 >= cluster_tol)
        .ok_or(Error::GaplessSpectrum { tol: cluster_tol })?;
    let gap = eig.values[s] - e0;
    let mut ground_projector = ComplexMatrix::zeros(dim, dim);
    for k in 0..s {
        let v = eig.vectors.column(k);
        ground_projector += &ComplexMatrix::outer(&v, &v);
    }
    Ok(SpectralData {
        energies: eig.values,
        eigvecs: eig.vectors,
        s,
        gap,
        ground_projector,
        cluster_tol,
    })
}

/// [`analyze_spectrum`] with the default clustering tolerance.
pub fn analyze_spectrum_default(h: &ComplexMatrix) -> Result<SpectralData> {
    let norm = linalg::spectral_norm(h)?;
    analyze_spectrum(h, default_cluster_tol(norm))
}

/// Open-boundary transverse-field Ising chain
/// `H = -0.5 sum_k X_k - sum_k Z_k Z_{k+1}`.
pub fn tfim(n: usize) -> Result<PauliHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("TFIM needs at least 2 qubits, got {n}")));
    }
    let site = |letters: &[(usize, char)]| -> PauliString {
        let s: String = (0..n)
            .map(|q| letters.iter().find(|(site, _)| *site == q).map_or('I', |&(_, c)| c))
            .collect();
        s.parse().expect("valid Pauli letters")
    };
    let mut terms = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        terms.push(PauliTerm {
            coeff: -0.5,
            string: site(&[(k, 'X')]),
        });
    }
    for k in 0..n - 1 {
        terms.push(PauliTerm {
            coeff: -1.0,
            string: site(&[(k, 'Z'), (k + 1, 'Z')]),
        });
    }
    PauliHamiltonian::new(n, terms)
}

/// `L` distinct uniformly random Pauli strings with Gaussian coefficients
/// normalized to unit Euclidean norm. Strings are drawn first (colliding
/// draws are discarded), then the `L` coefficients.
pub fn random_pauli_hamiltonian<R: Rng + ?Sized>(n: usize, num_terms: usize, rng: &mut R) -> Result<PauliHamiltonian> {
    if num_terms == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let available = 4u128.checked_pow(n as u32).unwrap_or(u128::MAX);
    if num_terms as u128 > available {
        return Err(Error::TooFewDistinctStrings {
            requested: num_terms,
            n,
        });
    }
    let mut seen = HashSet::with_capacity(num_terms);
    let mut strings = Vec::with_capacity(num_terms);
    while strings.len() < num_terms {
        let s = sample_random_pauli(n, rng);
        if seen.insert(s.clone()) {
            strings.push(s);
        }
    }
    let mut coeffs: Vec<f64> = (0..num_terms).map(|_| rng.sample(StandardNormal)).collect();
    let norm = coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::AllZeroCoefficients);
    }
    coeffs.iter_mut().for_each(|a| *a /= norm);
    let terms = strings
        .into_iter()
        .zip(coeffs)
        .map(|(string, coeff)| PauliTerm { coeff, string })
        .collect();
    PauliHamiltonian::new(n, terms)
}

/// `<phi_0| U_N^H ... U_1^H H U_1 ... U_N |phi_0>`.
pub fn energy(h: &ComplexMatrix, circuit: &CircuitState) -> Result<f64> {
    h.require_square()?;
    if h.rows() != circuit.dim() {
        return Err(Error::DimensionMismatch {
            expected: circuit.dim(),
            found: h.rows(),
        });
    }
    circuit.check_unitary(UNITARY_TOL)?;
    Ok(energy_unchecked(h, &circuit.output_state()))
}

/// `<phi|H|phi>` with no validation.
pub(crate) fn energy_unchecked(h: &ComplexMatrix, phi: &[C64]) -> f64 {
    linalg::dot(phi, &h.mul_vec(phi)).re
}

/// Energy of a state given as amplitudes; validates normalization.
pub fn state_energy(h: &ComplexMatrix, phi: &StateVector) -> Result<f64> {
    if h.rows() != phi.dim() || !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            found: h.rows(),
        });
    }
    Ok(energy_unchecked(h, phi.amplitudes()))
}
