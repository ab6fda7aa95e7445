//! Dense statevector simulation.

pub(crate) mod diag;
pub(crate) mod noise;
mod pauli;
mod sampling;
mod state;

pub use diag::{dense_matrix, exact_ground_energy, DENSE_LIMIT};
pub use noise::{apply_noisy_gate, NoiseSpec};
pub use pauli::{expectation, Observable, Pauli, PauliTerm};
pub use sampling::{sample_expectation, MeasurementGroup, MeasurementPlan, ShotConfig, ShotMode};
pub use state::{apply_gate, init_basis_state, StateVector, MAX_QUBITS};
