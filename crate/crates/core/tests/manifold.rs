mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use unitary_vqe::hamiltonian::{analyze_spectrum_default, tfim};
use unitary_vqe::manifold::{
    classify_critical_points, gradient_lower_bound, hessian_bilinear, hessian_bilinear_commutator, layer_gradients,
    project_tangent, retract, riemannian_gradient_layer, riemannian_gradient_single, tangency_defect, CriticalKind,
    TangentVector,
};
use unitary_vqe::pauli::reconstruct;
use unitary_vqe::{CircuitState, ComplexMatrix, StateVector, C64};

fn spectral_norm_oracle(h: &ComplexMatrix) -> f64 {
    let ev = jacobi_eigenvalues(h);
    ev[0].abs().max(ev[ev.len() - 1].abs())
}

#[test]
fn gradient_norm_is_half_the_variance() {
    let mut r = rng(30);
    for i in 0..200 {
        let dim = [2, 4, 8, 16][i % 4];
        let h = random_hermitian(&mut r, dim);
        let u = random_unitary(&mut r, dim);
        let phi0 = random_state(&mut r, dim);
        let g = riemannian_gradient_single(&h, &phi0, &u).unwrap();
        let phi = apply(&u, phi0.amplitudes());
        let f = expectation(&h, &phi);
        let h2 = expectation(&naive_mul(&h, &h), &phi);
        let norm = spectral_norm_oracle(&h);
        assert!((g.norm_sq() - 0.5 * (h2 - f * f)).abs() <= 1e-10 * norm.powi(2).max(1.0));
    }
}

#[test]
fn gradient_matches_commutator_form() {
    // grad = (1/2)[H, U rho_0 U^H] U
    let mut r = rng(31);
    let h = random_hermitian(&mut r, 8);
    let u = random_unitary(&mut r, 8);
    let phi0 = random_state(&mut r, 8);
    let phi = apply(&u, phi0.amplitudes());
    let rho = ComplexMatrix::from_fn(8, 8, |i, j| phi[i] * phi[j].conj());
    let comm = ComplexMatrix::from_fn(8, 8, |i, j| {
        (naive_mul(&h, &rho)[(i, j)] - naive_mul(&rho, &h)[(i, j)]) * 0.5
    });
    let expected = naive_mul(&comm, &u);
    let g = riemannian_gradient_single(&h, &phi0, &u).unwrap();
    assert!(diff(g.direction(), &expected) < 1e-12);
}

/// `f(exp(s Omega) U)` along a one-parameter subgroup.
fn along(
    h: &ComplexMatrix,
    phi0: &StateVector,
    layers: &[ComplexMatrix],
    idx: usize,
    omega: &ComplexMatrix,
    s: f64,
) -> f64 {
    let step = expm(&omega.scale_real(s));
    let mut moved = layers.to_vec();
    moved[idx] = naive_mul(&step, &layers[idx]);
    product_energy(h, &moved, phi0.amplitudes())
}

#[test]
fn single_gradient_matches_finite_differences() {
    let mut r = rng(32);
    let step = 1e-5;
    for i in 0..50 {
        let dim = [2, 4, 8, 16][i % 4];
        let h = random_hermitian(&mut r, dim);
        let u = random_unitary(&mut r, dim);
        let phi0 = random_state(&mut r, dim);
        let g = riemannian_gradient_single(&h, &phi0, &u).unwrap();
        for _ in 0..5 {
            let raw = random_skew(&mut r, dim);
            let omega = raw.scale_real(1.0 / frob(&raw));
            let xi = naive_mul(&omega, &u);
            let analytic = 2.0 * g.direction().inner(&xi).re;
            let layers = [u.clone()];
            let fd = (along(&h, &phi0, &layers, 0, &omega, step) - along(&h, &phi0, &layers, 0, &omega, -step))
                / (2.0 * step);
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs(),
                "fd {fd} analytic {analytic}"
            );
        }
    }
}

#[test]
fn layer_gradients_match_finite_differences() {
    let mut r = rng(33);
    let step = 1e-5;
    for i in 0..50 {
        let dim = [2, 4, 8, 16][i % 4];
        let num_layers = 1 + i % 4;
        let h = random_hermitian(&mut r, dim);
        let layers: Vec<ComplexMatrix> = (0..num_layers).map(|_| random_unitary(&mut r, dim)).collect();
        let phi0 = random_state(&mut r, dim);
        let c = CircuitState::new(layers.clone(), phi0.clone()).unwrap();
        let idx = r.random_range(0..num_layers);
        let g = riemannian_gradient_layer(&h, &phi0, &c, idx).unwrap();
        for _ in 0..5 {
            let raw = random_skew(&mut r, dim);
            let omega = raw.scale_real(1.0 / frob(&raw));
            let xi = naive_mul(&omega, &layers[idx]);
            let analytic = 2.0 * g.direction().inner(&xi).re;
            let fd = (along(&h, &phi0, &layers, idx, &omega, step) - along(&h, &phi0, &layers, idx, &omega, -step))
                / (2.0 * step);
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs(),
                "fd {fd} analytic {analytic}"
            );
        }
    }
}

#[test]
fn low_rank_layer_gradients_match_dense() {
    let mut r = rng(34);
    for num_layers in 1..=5 {
        let h = random_hermitian(&mut r, 8);
        let layers: Vec<ComplexMatrix> = (0..num_layers).map(|_| random_unitary(&mut r, 8)).collect();
        let phi0 = random_state(&mut r, 8);
        let c = CircuitState::new(layers.clone(), phi0.clone()).unwrap();
        let fast = layer_gradients(&h, &c);
        assert!((fast.objective - product_energy(&h, &layers, phi0.amplitudes())).abs() < 1e-12);
        let mut total = 0.0;
        for (idx, gen) in fast.generators.iter().enumerate() {
            let dense = riemannian_gradient_layer(&h, &phi0, &c, idx).unwrap();
            let from_gen = naive_mul(&gen.to_dense(), &layers[idx]);
            assert!(diff(&from_gen, dense.direction()) < 1e-12);
            assert!((gen.norm_sq() - dense.norm_sq()).abs() < 1e-12);
            total += dense.norm_sq();
        }
        assert!((fast.norm_sq() - total).abs() < 1e-12);
        // Every layer sees the same gradient norm.
        let first = fast.generators[0].norm_sq();
        assert!(fast.generators.iter().all(|g| (g.norm_sq() - first).abs() < 1e-12));
    }
}

#[test]
fn low_rank_retraction_matches_polar() {
    let mut r = rng(35);
    for _ in 0..20 {
        let dim = [2, 4, 8, 16][r.random_range(0..4)];
        let h = random_hermitian(&mut r, dim);
        let layers: Vec<ComplexMatrix> = (0..2).map(|_| random_unitary(&mut r, dim)).collect();
        let c = CircuitState::new(layers.clone(), random_state(&mut r, dim)).unwrap();
        let grads = layer_gradients(&h, &c);
        let mu = r.random_range(0.01..2.0);
        for (idx, gen) in grads.generators.iter().enumerate() {
            let tv = TangentVector::from_generator(layers[idx].clone(), &gen.to_dense().scale_real(-mu)).unwrap();
            let expected = retract(&tv);
            let fast = gen.retract(-mu, &layers[idx]);
            assert!(diff(&fast, &expected) < 1e-11);
            assert!(fast.unitarity_defect() < 1e-12);
        }
    }
}

#[test]
fn retraction_second_order_bound() {
    let mut r = rng(36);
    let mut violations = 0;
    for i in 0..200 {
        let dim = [2, 4, 8, 16][i % 4];
        let u = random_unitary(&mut r, dim);
        let omega = random_skew(&mut r, dim);
        let raw = naive_mul(&omega, &u);
        let target = 10f64.powf(r.random_range(-3.0..0.0));
        let xi = raw.scale_real(target / frob(&raw));
        let tv = TangentVector::new(u.clone(), xi.clone()).unwrap();
        let moved = retract(&tv);
        let sum = ComplexMatrix::from_fn(dim, dim, |a, b| u[(a, b)] + xi[(a, b)]);
        if diff(&moved, &sum) > 0.5 * target * target {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn hessian_forms_agree_and_classify() {
    let mut r = rng(37);
    let mut hamiltonians: Vec<ComplexMatrix> = (2..=3).map(|n| reconstruct(&tfim(n).unwrap()).unwrap()).collect();
    for i in 0..10 {
        hamiltonians.push(random_hermitian(&mut r, [2, 4, 8, 16, 3][i % 5]));
    }
    for h in &hamiltonians {
        let dim = h.rows();
        let spec = analyze_spectrum_default(h).unwrap();
        let phi0 = StateVector::basis(dim, 0);
        let points = classify_critical_points(&spec, &phi0);
        assert_eq!(points.len(), dim);
        for p in &points {
            assert!(p.unitary.unitarity_defect() < 1e-12);
            let g = riemannian_gradient_single(h, &phi0, &p.unitary).unwrap();
            assert!(g.norm_sq().sqrt() <= 1e-8);
            for _ in 0..50 {
                let omega = random_skew(&mut r, dim);
                let spectral = hessian_bilinear(&spec, p.k, &omega).unwrap();
                let commutator = hessian_bilinear_commutator(h, &phi0, &p.unitary, &omega).unwrap();
                assert!((spectral - commutator).abs() <= 1e-8 * frob(&omega).powi(2).max(1.0));
                if p.kind == CriticalKind::GlobalMinimum {
                    assert!(spectral >= -1e-9);
                }
            }
            match p.kind {
                CriticalKind::GlobalMinimum => assert!(p.k < spec.s),
                CriticalKind::StrictSaddle => {
                    assert!(p.k >= spec.s);
                    let w = p.witness.as_ref().unwrap();
                    let psi0 = spec.eigvec(0);
                    let psik = spec.eigvec(p.k);
                    let w0k: C64 = psi0.iter().zip(apply(w, &psik)).map(|(a, b)| a.conj() * b).sum();
                    let value = p.witness_value.unwrap();
                    assert!(value <= -2.0 * spec.gap * w0k.norm_sqr() + 1e-9);
                    let comm = hessian_bilinear_commutator(h, &phi0, &p.unitary, w).unwrap();
                    assert!((comm - value).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn gradient_dominates_lower_bound() {
    let mut r = rng(38);
    for i in 0..100 {
        let dim = [2, 4, 8, 16][i % 4];
        let h = random_hermitian(&mut r, dim);
        let spec = analyze_spectrum_default(&h).unwrap();
        let phi0 = random_state(&mut r, dim);
        let u = random_unitary(&mut r, dim);
        let g = riemannian_gradient_single(&h, &phi0, &u).unwrap();
        let phi = StateVector::new(apply(&u, phi0.amplitudes())).unwrap();
        assert!(g.norm_sq() >= gradient_lower_bound(&spec, &phi) - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_and_tangent(seed in any::<u64>(), dim in 1usize..9) {
        let mut r = rng(seed);
        let u = random_unitary(&mut r, dim);
        let a = random_matrix(&mut r, dim);
        let once = project_tangent(&u, &a).unwrap();
        prop_assert!(tangency_defect(&u, once.direction()) < 1e-12 * frob(&a).max(1.0));
        let twice = project_tangent(&u, once.direction()).unwrap();
        prop_assert!(diff(once.direction(), twice.direction()) < 1e-12 * frob(&a).max(1.0));
    }

    #[test]
    fn retraction_stays_unitary(seed in any::<u64>(), dim in 1usize..9, scale in 0.0f64..10.0) {
        let mut r = rng(seed);
        let u = random_unitary(&mut r, dim);
        let omega = random_skew(&mut r, dim).scale_real(scale);
        let tv = TangentVector::from_generator(u, &omega).unwrap();
        prop_assert!(retract(&tv).unitarity_defect() < 1e-10);
    }
}

#[test]
fn excited_weight_sandwich_and_lower_bound() {
    let h = reconstruct(&tfim(3).unwrap()).unwrap();
    let spec = analyze_spectrum_default(&h).unwrap();
    let e0 = spec.ground_energy();
    let norm = spec.operator_norm();
    let mut r = rng(39);
    for _ in 0..50 {
        let u = random_unitary(&mut r, 8);
        let phi0 = StateVector::basis(8, 0);
        let phi = apply(&u, phi0.amplitudes());
        let p = spec.excited_weight(&phi);
        let gap = expectation(&h, &phi) - e0;
        assert!(gap / (2.0 * norm) <= p + 1e-10);
        assert!(p <= gap / spec.gap + 1e-10);
        let g = riemannian_gradient_single(&h, &phi0, &u).unwrap();
        assert!(g.norm_sq() >= 0.25 * spec.gap * spec.gap * p * (1.0 - p) - 1e-10);
    }
}

#[test]
fn product_gradient_is_lipschitz() {
    let mut r = rng(50);
    for num_layers in 1..=4 {
        let h = random_hermitian(&mut r, 8);
        let norm = spectral_norm_oracle(&h);
        let phi0 = random_state(&mut r, 8);
        let full_grad = |layers: &[ComplexMatrix]| -> Vec<ComplexMatrix> {
            let c = CircuitState::new(layers.to_vec(), phi0.clone()).unwrap();
            (0..layers.len())
                .map(|idx| riemannian_gradient_layer(&h, &phi0, &c, idx).unwrap().into_direction())
                .collect()
        };
        for _ in 0..20 {
            let us: Vec<ComplexMatrix> = (0..num_layers).map(|_| random_unitary(&mut r, 8)).collect();
            // Nearby and far pairs both.
            let scale = 10f64.powf(r.random_range(-3.0..0.5));
            let vs: Vec<ComplexMatrix> = us
                .iter()
                .map(|u| {
                    let tv =
                        TangentVector::from_generator(u.clone(), &random_skew(&mut r, 8).scale_real(scale)).unwrap();
                    retract(&tv)
                })
                .collect();
            let gu = full_grad(&us);
            let gv = full_grad(&vs);
            let num: f64 = gu.iter().zip(&gv).map(|(a, b)| diff(a, b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = us.iter().zip(&vs).map(|(a, b)| diff(a, b).powi(2)).sum::<f64>().sqrt();
            assert!(num / den <= 4.0 * (num_layers as f64).sqrt() * norm + 1e-8);
        }
    }
}
