//! Reference implementations used as test oracles. None of these call into
//! the numerical kernels of the crate under test.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use unitary_vqe::{ComplexMatrix, StateVector, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_c(rng))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let a = random_matrix(rng, dim);
    ComplexMatrix::from_fn(dim, dim, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn random_skew<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let a = random_matrix(rng, dim);
    ComplexMatrix::from_fn(dim, dim, |i, j| (a[(i, j)] - a[(j, i)].conj()) * 0.5)
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> StateVector {
    let v: Vec<C64> = (0..dim).map(|_| gaussian_c(rng)).collect();
    StateVector::normalized(v).unwrap()
}

/// Haar-like unitary from modified Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian_c(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let p: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Plain triple-loop product.
pub fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

pub fn naive_adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)].conj())
}

pub fn frob(a: &ComplexMatrix) -> f64 {
    a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn naive_kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * p, a.cols() * q, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)])
}

/// Single-qubit Pauli matrices written out by hand.
pub fn pauli_2x2(c: char) -> ComplexMatrix {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let data = match c {
        'I' => vec![l, o, o, l],
        'X' => vec![o, l, l, o],
        'Y' => vec![o, -i, i, o],
        'Z' => vec![l, o, o, -l],
        _ => panic!("not a Pauli letter"),
    };
    ComplexMatrix::new(2, 2, data).unwrap()
}

/// Tensor product of letters, leftmost letter as the most significant factor.
pub fn pauli_kron(s: &str) -> ComplexMatrix {
    s.chars().map(pauli_2x2).reduce(|acc, m| naive_kron(&acc, &m)).unwrap()
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi on the real symmetric
/// embedding `[[A, -B], [B, A]]`; each eigenvalue appears twice there.
pub fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.rows();
    let m = 2 * d;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..d {
        for j in 0..d {
            let z = h[(i, j)];
            a[i][j] = z.re;
            a[i + d][j + d] = z.re;
            a[i][j + d] = -z.im;
            a[i + d][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

/// `exp(A)` by scaling and squaring with a 20-term Taylor series.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let norm = frob(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] / 2f64.powi(squarings as i32));
    let dim = a.rows();
    let mut result = ComplexMatrix::identity(dim);
    let mut term = ComplexMatrix::identity(dim);
    for k in 1..=20 {
        term = naive_mul(&term, &scaled);
        term = ComplexMatrix::from_fn(dim, dim, |i, j| term[(i, j)] / k as f64);
        result = ComplexMatrix::from_fn(dim, dim, |i, j| result[(i, j)] + term[(i, j)]);
    }
    for _ in 0..squarings {
        result = naive_mul(&result, &result);
    }
    result
}

pub fn expectation(h: &ComplexMatrix, phi: &[C64]) -> f64 {
    let d = phi.len();
    (0..d)
        .map(|i| phi[i].conj() * (0..d).map(|j| h[(i, j)] * phi[j]).sum::<C64>())
        .sum::<C64>()
        .re
}

pub fn apply(u: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    (0..u.rows())
        .map(|i| (0..u.cols()).map(|j| u[(i, j)] * v[j]).sum())
        .collect()
}

/// `<phi_0| W^H H W |phi_0>` with `W = U_1 ... U_N`, by hand.
pub fn product_energy(h: &ComplexMatrix, layers: &[ComplexMatrix], phi0: &[C64]) -> f64 {
    let phi = layers.iter().rev().fold(phi0.to_vec(), |v, u| apply(u, &v));
    expectation(h, &phi)
}
