//! Symplectic Pauli algebra and Clifford conjugation.

mod clifford;
mod pauli;

use thiserror::Error;

pub(crate) use clifford::normalize_to_z;
pub use clifford::{
    cnot_matrix, cz_matrix, dense_conjugation_matches, routing_clifford_2q, swap_matrix,
    CliffordCircuit, CliffordGate, CliffordTableau,
};
pub use pauli::{Pauli, PauliKey, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliffordError {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("the identity has no routing to Z")]
    TrivialPauli,
    #[error("{0} is not Hermitian; only ±1 prefactors can be routed")]
    NonHermitian(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("tableau images violate the commutation relations")]
    NotSymplectic,
    #[error("cannot parse Pauli string: {0}")]
    Parse(String),
}
