//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by frame construction, simulation, and optimization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("qubit count {0} outside supported dense range 1..=12")]
    QubitCount(usize),

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("dual coefficients violate T = T*Tau*T (residual {0:.3e})")]
    InvalidDual(f64),

    #[error("outcome probabilities sum to {0}, expected 1 within 1e-9")]
    Probability(f64),

    #[error("interface enumeration size {size:.3e} exceeds the cap {cap:.1e}")]
    EnumerationTooLarge { size: f64, cap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
