//! Variational ground-state search over products of unitaries, with
//! Riemannian gradient descent on `U(D)`.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod hamiltonian;
pub mod init;
pub mod linalg;
pub mod manifold;
pub mod measurement;
pub mod optimizer;
pub mod pauli;
pub mod rng;

pub use circuit::CircuitState;
pub use error::{Error, Result};
pub use hamiltonian::SpectralData;
pub use linalg::{ComplexMatrix, StateVector, C64};
pub use pauli::{Pauli, PauliHamiltonian, PauliString};
