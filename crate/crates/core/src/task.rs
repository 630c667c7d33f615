//! Objective definitions shared by the trainer, the engine and the benchmarks.

use serde::{Deserialize, Serialize};

use crate::genome::CircuitGenome;
use crate::objective::{EncodedSample, FeatureRange, LossKind, ReadoutMap};
use crate::qsim::{ObservableSpec, StateVector};

/// A labelled classification problem with a fixed train/test split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetTask {
    pub name: String,
    pub num_classes: usize,
    pub num_input_qubits: usize,
    /// Readout qubits sit directly above the input qubits.
    pub readout: ReadoutMap,
    /// Scaling statistics, computed on the training rows only.
    pub ranges: Vec<FeatureRange>,
    pub train: Vec<EncodedSample>,
    pub test: Vec<EncodedSample>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl DatasetTask {
    pub fn num_qubits(&self) -> usize {
        self.num_input_qubits + self.readout.readout_qubits.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeacherFamily {
    BaselineSingleGate,
    BellGenerator,
    InputControlled,
    MultiLayer,
}

/// Imitation of a fixed circuit on a set of probe states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeacherTask {
    pub family: TeacherFamily,
    pub teacher: CircuitGenome,
    pub probes: Vec<StateVector>,
    pub targets: Vec<StateVector>,
    pub loss: LossKind,
    /// Used by the observable loss.
    pub observables: Vec<ObservableSpec>,
}

impl TeacherTask {
    pub fn num_qubits(&self) -> usize {
        self.teacher.num_qubits()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TaskSpec {
    Dataset(DatasetTask),
    Teacher(TeacherTask),
}

impl TaskSpec {
    pub fn name(&self) -> String {
        match self {
            TaskSpec::Dataset(d) => d.name.clone(),
            TaskSpec::Teacher(t) => format!("{}_teacher", family_name(t.family)),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            TaskSpec::Dataset(d) => d.num_qubits(),
            TaskSpec::Teacher(t) => t.num_qubits(),
        }
    }

    pub fn input_qubits(&self) -> Vec<usize> {
        match self {
            TaskSpec::Dataset(d) => (0..d.num_input_qubits).collect(),
            TaskSpec::Teacher(t) => (0..t.num_qubits()).collect(),
        }
    }

    pub fn output_qubits(&self) -> Vec<usize> {
        match self {
            TaskSpec::Dataset(d) => d.readout.readout_qubits.clone(),
            TaskSpec::Teacher(t) => (0..t.num_qubits()).collect(),
        }
    }

    pub fn loss_kind(&self) -> LossKind {
        match self {
            TaskSpec::Dataset(_) => LossKind::CrossEntropy,
            TaskSpec::Teacher(t) => t.loss,
        }
    }

    /// The empty genome every run starts from.
    pub fn base_genome(&self) -> CircuitGenome {
        CircuitGenome::new(self.num_qubits(), self.input_qubits(), self.output_qubits())
            .expect("task registers are well formed")
    }
}

fn family_name(f: TeacherFamily) -> &'static str {
    match f {
        TeacherFamily::BaselineSingleGate => "baseline",
        TeacherFamily::BellGenerator => "bell",
        TeacherFamily::InputControlled => "input_controlled",
        TeacherFamily::MultiLayer => "multi_layer",
    }
}
