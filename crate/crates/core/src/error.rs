use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("state norm² is {0}, expected 1")]
    NotNormalized(f64),

    #[error("expectation value has imaginary residue {0:e}")]
    NotReal(f64),

    #[error("operator is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("invalid architecture: {0}")]
    Architecture(String),

    #[error("symbolic engine refuses L·Q = {slots} > {limit} (3^{slots} sequences)")]
    MemoryGuard { slots: usize, limit: usize },

    #[error(
        "sampling grid too coarse in dimension {dim}: {given} samples per period, at least {required} required"
    )]
    Nyquist { dim: usize, given: usize, required: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
