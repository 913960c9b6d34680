//! Accessible dimension of quantum circuit architectures.
//!
//! The accessible dimension of an architecture is the generic rank of the
//! map sending a list of two-qubit gates to the unitary (or state) they
//! contract to. This crate builds architectures, estimates that rank
//! numerically at Haar-random points, constructs all-Clifford witness points
//! whose rank provably grows by one per causal slice, and evaluates the
//! associated complexity bounds.

pub mod architecture;
pub mod bounds;
pub mod contraction;
pub mod dense;
pub mod experiments;
pub mod pauli_clifford;
pub mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use architecture::{Architecture, ArchitectureError};
pub use contraction::{
    ContractionConfig, ContractionError, GateAssignment, RankReport, Tolerances,
};
pub use pauli_clifford::{
    CliffordCircuit, CliffordError, CliffordGate, CliffordTableau, Pauli, PauliString,
};
pub use witness::{WitnessCertificate, WitnessError};

/// Whether the contraction map's output is the full unitary or the state
/// it prepares from `|0^n⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Unitary,
    State,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unitary => "unitary",
            Mode::State => "state",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unitary" => Ok(Mode::Unitary),
            "state" => Ok(Mode::State),
            other => Err(format!("unknown mode {other:?}, expected unitary or state")),
        }
    }
}
