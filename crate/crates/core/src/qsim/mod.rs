//! Dense statevector simulation.
//!
//! Qubit convention: qubit 0 is the least-significant bit of a basis-state
//! label. A two-qubit state written `|q1 q0⟩` therefore has `|10⟩` (qubit 1
//! set) at index 2 and `|01⟩` (qubit 0 set) at index 1.

mod gates;
mod matrix;
mod state;

use thiserror::Error;

use crate::genome::CircuitGenome;

pub use gates::{gate_unitary, gate_unitary_derivative, supports_two_term_shift, GateKind, Role};
pub use matrix::Matrix;
pub use state::{
    apply_gate, expectation, marginal_probabilities, overlap, ObservableSpec, Pauli, StateVector,
};

pub(crate) use state::{apply_matrix, apply_pauli, expectation_unchecked, inner};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("{kind} takes {expected} parameter(s), got {got}")]
    ParamArity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("bad qubit index: {0}")]
    QubitIndex(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("qubit list must not be empty")]
    EmptyQubits,
    #[error("unknown gate kind `{0}`")]
    UnknownGate(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// Runs the enabled gates of `genome` on `initial` in (depth, innovation)
/// order.
pub fn run_circuit(
    genome: &CircuitGenome,
    initial: &StateVector,
) -> Result<StateVector, QsimError> {
    if genome.num_qubits() > initial.num_qubits() {
        return Err(QsimError::Dimension {
            expected: 1 << genome.num_qubits(),
            got: initial.dim(),
        });
    }
    let mut state = initial.clone();
    for gate in genome.enabled_gates() {
        state.apply_gate_in_place(gate.kind(), gate.qubits(), gate.params())?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests;
