use thiserror::Error;

/// Errors produced by the simulator, circuit builders and training loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BqcError {
    #[error("register size {0} is outside the supported range 1..={max}", max = crate::statevector::MAX_QUBITS)]
    Size(usize),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    Index { index: usize, num_qubits: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("latent capacity exceeded: {latents} latent states do not fit in {ancillas} ancilla qubits")]
    Capacity { latents: usize, ancillas: usize },

    #[error("unresolved parameter slot {0}")]
    Binding(String),

    #[error("cannot condition on outcome {index}: probability {probability:e} is below threshold")]
    Conditioning { index: usize, probability: f64 },

    #[error("register split has no ancilla qubits")]
    NoAncilla,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, BqcError>;
