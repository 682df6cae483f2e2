use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, C64};

/// Tolerance on `||U^H U - I||_F` for layers accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-8;

/// Product-unitary circuit `U_1 U_2 ... U_N` acting on a reference state.
///
/// `layers[0]` is `U_1`, the factor applied last; `layers[N-1]` acts
/// directly on the reference state.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitState {
    layers: Vec<ComplexMatrix>,
    reference: StateVector,
}

impl CircuitState {
    pub fn new(layers: Vec<ComplexMatrix>, reference: StateVector) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("circuit needs at least one layer".into()));
        }
        let dim = reference.dim();
        for layer in &layers {
            if layer.rows() != dim || layer.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if layer.rows() != dim {
                        layer.rows()
                    } else {
                        layer.cols()
                    },
                });
            }
        }
        Ok(Self { layers, reference })
    }

    /// `num_layers` identity layers.
    pub fn identity(num_layers: usize, reference: StateVector) -> Self {
        let dim = reference.dim();
        Self {
            layers: vec![ComplexMatrix::identity(dim); num_layers.max(1)],
            reference,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn layers(&self) -> &[ComplexMatrix] {
        &self.layers
    }

    pub fn layer(&self, h: usize) -> &ComplexMatrix {
        &self.layers[h]
    }

    pub fn reference(&self) -> &StateVector {
        &self.reference
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<ComplexMatrix> {
        self.layers
    }

    /// Replaces the layers, keeping the reference state.
    pub fn with_layers(&self, layers: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(layers, self.reference.clone())
    }

    /// Errors with the first layer whose unitarity defect exceeds `tol`.
    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        for (index, layer) in self.layers.iter().enumerate() {
            let deviation = layer.unitarity_defect();
            if !(deviation <= tol) {
                return Err(Error::NonUnitaryLayer { index, deviation });
            }
        }
        Ok(())
    }

    /// `U_1 ... U_N |phi_0>`, applying the layers right to left.
    pub fn output_state(&self) -> Vec<C64> {
        self.layers
            .iter()
            .rev()
            .fold(self.reference.amplitudes().to_vec(), |v, u| u.mul_vec(&v))
    }

    /// Collapsed product `U_1 ... U_N`.
    pub fn product(&self) -> ComplexMatrix {
        self.layers
            .iter()
            .skip(1)
            .fold(self.layers[0].clone(), |acc, u| acc.matmul(u))
    }
}
