use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |m - m†| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix has eigenvalue {value:.3e} below the clamp tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("reference state is not pure (purity {purity:.12})")]
    NotPure { purity: f64 },

    #[error("{name} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("Kraus operators violate completeness (max defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("expected {expected} ancilla qubits, got {found}")]
    AncillaCountMismatch { expected: usize, found: usize },

    #[error("ancilla qubits are not in |0> (overlap {overlap:.12})")]
    AncillaNotGround { overlap: f64 },

    #[error("noise lookup table is empty")]
    EmptyTable,

    #[error("regression design matrix is rank deficient")]
    RankDeficient,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
