//! Density-matrix simulation of superdense coding under amplitude and phase
//! damping, with entropy-based correlation metrics, five-qubit stabilizer
//! error correction, DEJMPS distillation and ancilla-assisted adaptive
//! purification.

pub mod channels;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod metrics;
pub mod optimize;
pub mod protocol;
pub mod purification;
pub mod qec;
pub mod random;
pub mod state;
pub mod tensor;

pub use channels::{apply_channel, composite_channel_apply, KrausChannel, NoiseParams};
pub use error::{Error, Result};
pub use metrics::{
    classical_correlations, concurrence, entanglement_of_formation, mutual_information,
    quantum_discord, CorrelationReport, MeasurementAngles,
};
pub use state::{bell_state, fidelity, fidelity_with_pure, von_neumann_entropy, BellKind, DensityMatrix};
pub use tensor::{hermitian_eig, kron, matrix_sqrt, partial_trace, ComplexMatrix};
