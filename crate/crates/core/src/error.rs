use thiserror::Error;

/// Errors raised by the numerical kernels, builders and optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (||A - A^H||_F = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("matrix is not skew-Hermitian (||A + A^H||_F = {deviation:.3e})")]
    NonSkewHermitian { deviation: f64 },

    #[error("matrix is rank deficient (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("state vector is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("{n} qubits requested, at most {max} supported")]
    TooManyQubits { n: usize, max: usize },

    #[error("dimension {dim} is not a power of two")]
    NonPowerOfTwoDim { dim: usize },

    #[error("spectrum is gapless: all eigenvalues lie within {tol:.3e} of the ground energy")]
    GaplessSpectrum { tol: f64 },

    #[error("cannot draw {requested} distinct Pauli strings on {n} qubits")]
    TooFewDistinctStrings { requested: usize, n: usize },

    #[error("layer {index} is not unitary (||U^H U - I||_F = {deviation:.3e})")]
    NonUnitaryLayer { index: usize, deviation: f64 },

    #[error("base point is not unitary (||U^H U - I||_F = {deviation:.3e})")]
    NonUnitaryBase { deviation: f64 },

    #[error("index {index} out of range (valid: {min}..={max})")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("convergence rate {value} is outside [0, 1)")]
    RateOutOfRange { value: f64 },

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("shot budget {budget} is smaller than the number of terms {terms}")]
    BudgetTooSmall { budget: u64, terms: usize },

    #[error("all Hamiltonian coefficients are zero")]
    AllZeroCoefficients,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
