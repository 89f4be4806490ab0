use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("invalid qubit count {0}")]
    InvalidQubitCount(usize),

    #[error("{n_qubits} qubits exceeds the dense limit of {limit}")]
    DenseLimit { n_qubits: usize, limit: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    BadShape { rows: usize, cols: usize, expected: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("no real logarithm: {0}")]
    NoRealLogarithm(String),

    #[error("chi matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("not trace preserving: top row deviates by {0:.3e}")]
    NotTracePreserving(f64),

    #[error("invalid generator label: {0}")]
    InvalidLabel(String),

    #[error("invalid model spec: {0}")]
    InvalidModel(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
