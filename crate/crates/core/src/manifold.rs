//! Geometry of the unitary group `U(D)`.
//!
//! Tangent vectors at `U` have the form `Omega U` with `Omega` skew-Hermitian.
//! Gradients follow the convention `grad f(U) = H U rho_0 - U sym(U^H H U rho_0)`,
//! under which the directional derivative of `f` along a tangent `xi` is
//! `2 Re <grad f(U), xi>_F`.

use crate::circuit::{CircuitState, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::hamiltonian::SpectralData;
use crate::linalg::{self, polar_unitary, ComplexMatrix, StateVector, C64, ONE, ZERO};

/// Tolerance on `||xi^H U + U^H xi||_F`, relative to `max(1, ||xi||_F)`.
pub const TANGENT_TOL: f64 = 1e-9;

/// Tolerance on `||Omega + Omega^H||_F` for skew-Hermitian inputs.
pub const SKEW_TOL: f64 = 1e-10;

/// A direction `xi` in the tangent space at a unitary base point `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ComplexMatrix,
    direction: ComplexMatrix,
}

impl TangentVector {
    pub fn new(base: ComplexMatrix, direction: ComplexMatrix) -> Result<Self> {
        require_unitary(&base)?;
        if direction.rows() != base.rows() || direction.cols() != base.cols() {
            return Err(Error::DimensionMismatch {
                expected: base.rows(),
                found: direction.rows(),
            });
        }
        if !direction.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = tangency_defect(&base, &direction);
        if defect > TANGENT_TOL * direction.frobenius_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "direction is not tangent at the base point (defect {defect:.3e})"
            )));
        }
        Ok(Self { base, direction })
    }

    /// `Omega U` for a skew-Hermitian `Omega`.
    pub fn from_generator(base: ComplexMatrix, omega: &ComplexMatrix) -> Result<Self> {
        let direction = omega.matmul(&base);
        Self::new(base, direction)
    }

    pub fn base(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn direction(&self) -> &ComplexMatrix {
        &self.direction
    }

    pub fn into_direction(self) -> ComplexMatrix {
        self.direction
    }

    /// Skew-Hermitian generator `Omega = xi U^H`.
    pub fn generator(&self) -> ComplexMatrix {
        self.direction.matmul(&self.base.adjoint())
    }

    pub fn norm_sq(&self) -> f64 {
        self.direction.frobenius_norm_sq()
    }

    /// Same base point, direction multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            direction: self.direction.scale_real(s),
        }
    }
}

/// `||xi^H U + U^H xi||_F`.
pub fn tangency_defect(u: &ComplexMatrix, xi: &ComplexMatrix) -> f64 {
    let m = xi.adjoint().matmul(u);
    (&m + &m.adjoint()).frobenius_norm()
}

fn require_unitary(u: &ComplexMatrix) -> Result<()> {
    u.require_square()?;
    let deviation = u.unitarity_defect();
    if !(deviation <= UNITARY_TOL) {
        return Err(Error::NonUnitaryBase { deviation });
    }
    Ok(())
}

/// Orthogonal projection of `A` onto the tangent space at `U`:
/// `A - U sym(U^H A)`.
pub fn project_tangent(u: &ComplexMatrix, a: &ComplexMatrix) -> Result<TangentVector> {
    require_unitary(u)?;
    if a.rows() != u.rows() || a.cols() != u.cols() {
        return Err(Error::DimensionMismatch {
            expected: u.rows(),
            found: a.rows(),
        });
    }
    let direction = project_unchecked(u, a);
    Ok(TangentVector {
        base: u.clone(),
        direction,
    })
}

fn project_unchecked(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    let sym = u.adjoint().matmul(a).hermitian_part();
    a - &u.matmul(&sym)
}

fn check_problem(h: &ComplexMatrix, phi0: &StateVector) -> Result<()> {
    h.require_square()?;
    if h.rows() != phi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi0.dim(),
            found: h.rows(),
        });
    }
    let deviation = h.hermiticity_defect();
    if deviation > linalg::HERMITIAN_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::NonHermitian { deviation });
    }
    Ok(())
}

/// Riemannian gradient of `f(U) = <phi_0|U^H H U|phi_0>`.
pub fn riemannian_gradient_single(h: &ComplexMatrix, phi0: &StateVector, u: &ComplexMatrix) -> Result<TangentVector> {
    check_problem(h, phi0)?;
    if u.rows() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: u.rows(),
        });
    }
    require_unitary(u)?;
    let rho0 = phi0.projector();
    let euclidean = h.matmul(u).matmul(&rho0);
    Ok(TangentVector {
        base: u.clone(),
        direction: project_unchecked(u, &euclidean),
    })
}

/// Riemannian gradient of the product objective with respect to layer `h`
/// (zero-based, `layers[h]` is `U_{h+1}`).
///
/// The Euclidean gradient is
/// `(U_1...U_{h-1})^H H U_1...U_N rho_0 (U_{h+1}...U_N)^H`.
pub fn riemannian_gradient_layer(
    h_mat: &ComplexMatrix,
    phi0: &StateVector,
    circuit: &CircuitState,
    h: usize,
) -> Result<TangentVector> {
    check_problem(h_mat, phi0)?;
    let n = circuit.num_layers();
    if h >= n {
        return Err(Error::IndexOutOfRange {
            index: h,
            min: 0,
            max: n - 1,
        });
    }
    if circuit.dim() != phi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi0.dim(),
            found: circuit.dim(),
        });
    }
    circuit.check_unitary(UNITARY_TOL)?;
    let dim = phi0.dim();
    let layers = circuit.layers();
    let prefix = layers[..h]
        .iter()
        .fold(ComplexMatrix::identity(dim), |acc, u| acc.matmul(u));
    let suffix = layers[h + 1..]
        .iter()
        .fold(ComplexMatrix::identity(dim), |acc, u| acc.matmul(u));
    let total = prefix.matmul(&layers[h]).matmul(&suffix);
    let euclidean = prefix
        .adjoint()
        .matmul(h_mat)
        .matmul(&total)
        .matmul(&phi0.projector())
        .matmul(&suffix.adjoint());
    Ok(TangentVector {
        base: layers[h].clone(),
        direction: project_unchecked(&layers[h], &euclidean),
    })
}

/// Polar retraction `(U + xi) ((U + xi)^H (U + xi))^{-1/2}`.
pub fn retract(tv: &TangentVector) -> ComplexMatrix {
    let shifted = &tv.base + &tv.direction;
    // (U + xi)^H (U + xi) = I + xi^H xi for tangent xi, so this cannot be singular.
    polar_unitary(&shifted).expect("U + xi is invertible for unitary U and tangent xi")
}

/// Skew-Hermitian generator of rank at most two,
/// `Omega = (a b^H - b a^H) / 2`.
///
/// Layer gradients of the objective are `Omega_h U_h` with such generators,
/// which lets the optimizer retract in `O(D^2)` instead of a full polar
/// decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankGenerator {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl LowRankGenerator {
    pub fn to_dense(&self) -> ComplexMatrix {
        let ab = ComplexMatrix::outer(&self.a, &self.b);
        let ba = ComplexMatrix::outer(&self.b, &self.a);
        (&ab - &ba).scale_real(0.5)
    }

    /// `||Omega||_F^2`.
    pub fn norm_sq(&self) -> f64 {
        let na = linalg::norm_sq(&self.a);
        let nb = linalg::norm_sq(&self.b);
        let ab = linalg::dot(&self.a, &self.b);
        (0.5 * (na * nb - (ab * ab).re)).max(0.0)
    }

    /// Polar retraction of `U + scale * Omega U`, i.e.
    /// `(I + X)(I - X^2)^{-1/2} U` with `X = scale * Omega`.
    pub fn retract(&self, scale: f64, u: &ComplexMatrix) -> ComplexMatrix {
        let basis = orthonormal_basis(&[&self.a, &self.b]);
        let k = basis.len();
        if k == 0 || scale == 0.0 {
            return u.clone();
        }
        // x = Q^H X Q
        let qa: Vec<C64> = basis.iter().map(|q| linalg::dot(q, &self.a)).collect();
        let qb: Vec<C64> = basis.iter().map(|q| linalg::dot(q, &self.b)).collect();
        let mut x = [[ZERO; 2]; 2];
        for i in 0..k {
            for j in 0..k {
                x[i][j] = (qa[i] * qb[j].conj() - qb[i] * qa[j].conj()) * (0.5 * scale);
            }
        }
        // c = (I + x^H x)^{-1/2} - I; y = x + c + x c
        let mut m = [[ZERO; 2]; 2];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = (0..k).map(|l| x[l][i].conj() * x[l][j]).sum::<C64>();
            }
            m[i][i] += ONE;
        }
        let mut c = inv_sqrt_small(&m, k);
        for (i, row) in c.iter_mut().enumerate().take(k) {
            row[i] -= ONE;
        }
        let mut y = [[ZERO; 2]; 2];
        for i in 0..k {
            for j in 0..k {
                y[i][j] = x[i][j] + c[i][j] + (0..k).map(|l| x[i][l] * c[l][j]).sum::<C64>();
            }
        }
        // R = U + Q y (Q^H U)
        let dim = u.rows();
        let qh_u: Vec<Vec<C64>> = basis.iter().map(|q| u.adjoint_mul_vec(q)).collect();
        let qh_u: Vec<Vec<C64>> = qh_u.into_iter().map(|r| r.iter().map(|z| z.conj()).collect()).collect();
        let mut out = u.clone();
        for r in 0..dim {
            let mut coeff = [ZERO; 2];
            for (j, cj) in coeff.iter_mut().enumerate().take(k) {
                *cj = (0..k).map(|i| basis[i][r] * y[i][j]).sum();
            }
            for col in 0..dim {
                let delta: C64 = (0..k).map(|j| coeff[j] * qh_u[j][col]).sum();
                out[(r, col)] += delta;
            }
        }
        out
    }
}

fn orthonormal_basis(vectors: &[&Vec<C64>]) -> Vec<Vec<C64>> {
    let scale = vectors.iter().map(|v| linalg::norm_sq(v).sqrt()).fold(0.0, f64::max);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for v in vectors {
        let mut w = (*v).clone();
        for _ in 0..2 {
            for q in &basis {
                let proj = linalg::dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        let norm = linalg::norm_sq(&w).sqrt();
        if norm > 1e-13 * scale {
            w.iter_mut().for_each(|z| *z /= norm);
            basis.push(w);
        }
    }
    basis
}

/// Inverse square root of a Hermitian positive-definite matrix of size 1 or 2.
fn inv_sqrt_small(m: &[[C64; 2]; 2], k: usize) -> [[C64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    if k == 1 {
        out[0][0] = C64::new(1.0 / m[0][0].re.sqrt(), 0.0);
        return out;
    }
    // sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det)) for 2x2 SPD M.
    let p = m[0][0].re;
    let r = m[1][1].re;
    let w = m[0][1];
    let det = p * r - w.norm_sqr();
    let delta = det.sqrt();
    let t = (p + r + 2.0 * delta).sqrt();
    let s00 = (p + delta) / t;
    let s11 = (r + delta) / t;
    let s01 = w / t;
    let sdet = s00 * s11 - s01.norm_sqr();
    out[0][0] = C64::new(s11 / sdet, 0.0);
    out[1][1] = C64::new(s00 / sdet, 0.0);
    out[0][1] = -s01 / sdet;
    out[1][0] = -s01.conj() / sdet;
    out
}

/// Objective value and per-layer gradient generators, computed with
/// matrix-vector products only. Layer `h` has gradient `generators[h].to_dense() * U_h`.
#[derive(Clone, Debug)]
pub struct LayerGradients {
    pub objective: f64,
    pub generators: Vec<LowRankGenerator>,
}

impl LayerGradients {
    /// `sum_h ||grad_h||_F^2`.
    pub fn norm_sq(&self) -> f64 {
        self.generators.iter().map(LowRankGenerator::norm_sq).sum()
    }
}

/// Gradients of all layers at once. With `phi = U_1...U_N phi_0` and
/// `v = H phi`, the generator of layer `h` is
/// `(A_h^H v (A_h^H phi)^H - A_h^H phi (A_h^H v)^H) / 2`, `A_h = U_1...U_{h-1}`.
pub fn layer_gradients(h: &ComplexMatrix, circuit: &CircuitState) -> LayerGradients {
    let phi = circuit.output_state();
    let v = h.mul_vec(&phi);
    let objective = linalg::dot(&phi, &v).re;
    let mut generators = Vec::with_capacity(circuit.num_layers());
    let mut a = v;
    let mut b = phi;
    for (idx, u) in circuit.layers().iter().enumerate() {
        if idx + 1 < circuit.num_layers() {
            let next_a = u.adjoint_mul_vec(&a);
            let next_b = u.adjoint_mul_vec(&b);
            generators.push(LowRankGenerator { a, b });
            a = next_a;
            b = next_b;
        } else {
            generators.push(LowRankGenerator {
                a: std::mem::take(&mut a),
                b: std::mem::take(&mut b),
            });
        }
    }
    LayerGradients { objective, generators }
}

/// Riemannian Hessian bilinear form at the critical point `U_k` along
/// `Omega U_k`: `2 sum_l (E_l - E_k) |Omega_lk|^2`, with `Omega` given in the
/// computational basis and rotated into the eigenbasis internally.
pub fn hessian_bilinear(spec: &SpectralData, k: usize, omega: &ComplexMatrix) -> Result<f64> {
    let dim = spec.dim();
    if k >= dim {
        return Err(Error::IndexOutOfRange {
            index: k,
            min: 0,
            max: dim - 1,
        });
    }
    check_skew(omega, dim)?;
    let psi_k = spec.eigvec(k);
    let column = spec.eigvecs.adjoint_mul_vec(&omega.mul_vec(&psi_k));
    Ok(2.0
        * column
            .iter()
            .zip(&spec.energies)
            .map(|(w, e)| (e - spec.energies[k]) * w.norm_sqr())
            .sum::<f64>())
}

/// Hessian bilinear form from the commutator expression
/// `<Omega U, (1/2)([H,[Omega,rho]] + [[H,Omega],rho]) U>_F`,
/// `rho = U rho_0 U^H`, valid at any unitary `U`.
pub fn hessian_bilinear_commutator(
    h: &ComplexMatrix,
    phi0: &StateVector,
    u: &ComplexMatrix,
    omega: &ComplexMatrix,
) -> Result<f64> {
    check_problem(h, phi0)?;
    require_unitary(u)?;
    check_skew(omega, h.rows())?;
    let phi = u.mul_vec(phi0.amplitudes());
    let rho = ComplexMatrix::outer(&phi, &phi);
    let inner = h.commutator(&omega.commutator(&rho));
    let outer = h.commutator(omega).commutator(&rho);
    let hess = (&inner + &outer).scale_real(0.5);
    let xi = omega.matmul(u);
    Ok(xi.inner(&hess.matmul(u)).re)
}

fn check_skew(omega: &ComplexMatrix, dim: usize) -> Result<()> {
    if omega.rows() != dim || omega.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: omega.rows(),
        });
    }
    let deviation = omega.skew_hermiticity_defect();
    if deviation > SKEW_TOL * omega.frobenius_norm().max(1.0) {
        return Err(Error::NonSkewHermitian { deviation });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalKind {
    GlobalMinimum,
    StrictSaddle,
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub k: usize,
    /// A unitary with `U_k |phi_0> = |psi_k>`.
    pub unitary: ComplexMatrix,
    pub energy: f64,
    pub kind: CriticalKind,
    /// Descent generator in the computational basis (saddles only).
    pub witness: Option<ComplexMatrix>,
    /// Hessian bilinear form along the witness.
    pub witness_value: Option<f64>,
}

/// Unitary mapping `phi0` to `target`: a phase times a Householder
/// reflection.
pub fn completion_unitary(phi0: &[C64], target: &[C64]) -> ComplexMatrix {
    let dim = phi0.len();
    let overlap = linalg::dot(phi0, target);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    // phi' = phase * phi0 has a real, non-negative overlap with target.
    let shifted: Vec<C64> = phi0.iter().map(|&z| z * phase).collect();
    let v: Vec<C64> = shifted.iter().zip(target).map(|(a, b)| a - b).collect();
    let vv = linalg::norm_sq(&v);
    let mut reflect = ComplexMatrix::identity(dim);
    if vv > 1e-30 {
        reflect -= &ComplexMatrix::outer(&v, &v).scale_real(2.0 / vv);
    }
    reflect.scale(phase)
}

/// The `D` critical points `U_k |phi_0> = |psi_k>` and their classification.
pub fn classify_critical_points(spec: &SpectralData, phi0: &StateVector) -> Vec<CriticalPoint> {
    let dim = spec.dim();
    let psi0 = spec.eigvec(0);
    (0..dim)
        .map(|k| {
            let psi_k = spec.eigvec(k);
            let unitary = completion_unitary(phi0.amplitudes(), &psi_k);
            if k < spec.s {
                CriticalPoint {
                    k,
                    unitary,
                    energy: spec.energies[k],
                    kind: CriticalKind::GlobalMinimum,
                    witness: None,
                    witness_value: None,
                }
            } else {
                // Omega_{0k} = 1, Omega_{k0} = -1 in the eigenbasis.
                let witness = &ComplexMatrix::outer(&psi0, &psi_k) - &ComplexMatrix::outer(&psi_k, &psi0);
                let value = hessian_bilinear(spec, k, &witness).expect("witness is skew-Hermitian");
                CriticalPoint {
                    k,
                    unitary,
                    energy: spec.energies[k],
                    kind: CriticalKind::StrictSaddle,
                    witness: Some(witness),
                    witness_value: Some(value),
                }
            }
        })
        .collect()
}

/// `(Delta_1^2 / 4) p (1 - p)` with `p` the excited-space weight of `phi`.
pub fn gradient_lower_bound(spec: &SpectralData, phi: &StateVector) -> f64 {
    let p = spec.excited_weight(phi.amplitudes());
    spec.gap * spec.gap / 4.0 * p * (1.0 - p)
}
