use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range 1..={n}")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("matrix element ({i}, {j}) out of range 1..={dim}")]
    ElementOutOfRange { i: usize, j: usize, dim: usize },

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("state is not normalized: squared norm {norm_sq} deviates from 1 by more than {tol:e}")]
    NotNormalized { norm_sq: f64, tol: f64 },

    #[error("matrix is not Hermitian: max entrywise deviation {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("trace {trace} deviates from 1 by more than {tol:e}")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e} below {floor:e}")]
    NotPositive { min_eigenvalue: f64, floor: f64 },

    #[error("{n} qubits exceeds the dense limit of {cap} qubits")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("{n} qubits exceeds the permutation-sum limit of {cap} qubits")]
    FactorialGuard { n: usize, cap: usize },

    #[error("k = {k} is out of range for {n} qubits (allowed {min}..={max})")]
    InvalidK { k: usize, n: usize, min: usize, max: usize },

    #[error("ensemble length {length} is smaller than the state rank {rank}")]
    InfeasibleEnsemble { length: usize, rank: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed state file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by exceeding a size guard rather than by bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::DenseCapExceeded { .. } | Error::FactorialGuard { .. })
    }
}
