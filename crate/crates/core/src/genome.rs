//! Circuit genomes: an ordered list of gates with innovation numbers plus
//! input and output qubit designations.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::GateKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenomeError {
    #[error("genome invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// One gene: a gate placed at a depth in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    innovation: u64,
    kind: GateKind,
    depth: f64,
    qubits: Vec<usize>,
    params: Vec<f64>,
    enabled: bool,
}

impl GateSpec {
    /// `qubits` and `params` follow the slot and parameter order of `kind`.
    pub fn new(
        innovation: u64,
        kind: GateKind,
        depth: f64,
        qubits: Vec<usize>,
        params: Vec<f64>,
    ) -> Result<Self, GenomeError> {
        let gate = GateSpec {
            innovation,
            kind,
            depth,
            qubits,
            params,
            enabled: true,
        };
        gate.check()?;
        Ok(gate)
    }

    fn check(&self) -> Result<(), GenomeError> {
        if !(0.0..=1.0).contains(&self.depth) {
            return Err(GenomeError::Invariant(format!(
                "gate {} depth {} outside [0, 1]",
                self.innovation, self.depth
            )));
        }
        if self.qubits.len() != self.kind.arity() {
            return Err(GenomeError::Invariant(format!(
                "gate {} ({}) needs {} qubits, has {}",
                self.innovation,
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(GenomeError::Invariant(format!(
                    "gate {} uses qubit {q} twice",
                    self.innovation
                )));
            }
        }
        if self.params.len() != self.kind.num_params() {
            return Err(GenomeError::Invariant(format!(
                "gate {} ({}) needs {} parameters, has {}",
                self.innovation,
                self.kind,
                self.kind.num_params(),
                self.params.len()
            )));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(GenomeError::Invariant(format!(
                "gate {} has a non-finite parameter",
                self.innovation
            )));
        }
        Ok(())
    }

    pub fn innovation(&self) -> u64 {
        self.innovation
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn with_enabled(mut self, enabled: bool) -> Self {
        self.enabled = enabled;
        self
    }

    /// Copy of this gate under a new identity and depth, parameters kept.
    pub(crate) fn relocated(&self, innovation: u64, depth: f64) -> Self {
        GateSpec {
            innovation,
            depth,
            enabled: true,
            ..self.clone()
        }
    }

    pub(crate) fn set_qubit(&mut self, slot: usize, qubit: usize) {
        self.qubits[slot] = qubit;
    }

    pub(crate) fn set_params(&mut self, params: &[f64]) {
        debug_assert_eq!(params.len(), self.params.len());
        self.params.copy_from_slice(params);
    }

    fn order_key(&self, other: &GateSpec) -> Ordering {
        self.depth
            .total_cmp(&other.depth)
            .then(self.innovation.cmp(&other.innovation))
    }
}

/// Which operator produced a genome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Seed,
    Mutation,
    BinaryCrossover,
    NaryCrossover,
    ExponentialCrossover,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Operator::Seed => "seed",
            Operator::Mutation => "mutation",
            Operator::BinaryCrossover => "binary_crossover",
            Operator::NaryCrossover => "nary_crossover",
            Operator::ExponentialCrossover => "exponential_crossover",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    AddGate,
    ReorderGate,
    SwapQubits,
    EnableGate,
    DisableGate,
}

impl MutationKind {
    pub const ALL: [MutationKind; 5] = [
        MutationKind::AddGate,
        MutationKind::ReorderGate,
        MutationKind::SwapQubits,
        MutationKind::EnableGate,
        MutationKind::DisableGate,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub operator: Operator,
    /// Mutations that succeeded, in application order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mutations: Vec<MutationKind>,
    pub parents: Vec<u64>,
}

impl Lineage {
    pub fn seed() -> Self {
        Lineage {
            operator: Operator::Seed,
            mutations: Vec::new(),
            parents: Vec::new(),
        }
    }

    pub fn describe(&self) -> String {
        if self.mutations.is_empty() {
            return self.operator.to_string();
        }
        let applied: Vec<String> = self
            .mutations
            .iter()
            .map(|m| {
                serde_json::to_value(m)
                    .unwrap()
                    .as_str()
                    .unwrap()
                    .to_string()
            })
            .collect();
        format!("{}({})", self.operator, applied.join("+"))
    }
}

/// Issues innovation numbers. Never hands out the same value twice.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnovationCounter {
    next: u64,
}

impl InnovationCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts issuing at `next`.
    pub fn starting_at(next: u64) -> Self {
        InnovationCounter { next }
    }

    pub fn issue(&mut self) -> u64 {
        let v = self.next;
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GenomeRecord", into = "GenomeRecord")]
pub struct CircuitGenome {
    genome_id: u64,
    num_qubits: usize,
    input_qubits: Vec<usize>,
    output_qubits: Vec<usize>,
    gates: Vec<GateSpec>,
    fitness: Option<f64>,
    lineage: Lineage,
}

impl CircuitGenome {
    /// Empty genome (no gates).
    pub fn new(
        num_qubits: usize,
        input_qubits: Vec<usize>,
        output_qubits: Vec<usize>,
    ) -> Result<Self, GenomeError> {
        let g = CircuitGenome {
            genome_id: 0,
            num_qubits,
            input_qubits,
            output_qubits,
            gates: Vec::new(),
            fitness: None,
            lineage: Lineage::seed(),
        };
        g.check_registers()?;
        Ok(g)
    }

    fn check_registers(&self) -> Result<(), GenomeError> {
        if self.num_qubits == 0 {
            return Err(GenomeError::Invariant(
                "genome needs at least one qubit".into(),
            ));
        }
        for (name, list) in [
            ("input", &self.input_qubits),
            ("output", &self.output_qubits),
        ] {
            if list.is_empty() {
                return Err(GenomeError::Invariant(format!(
                    "{name} qubit list is empty"
                )));
            }
            for (i, &q) in list.iter().enumerate() {
                if q >= self.num_qubits {
                    return Err(GenomeError::Invariant(format!(
                        "{name} qubit {q} out of range for {} qubits",
                        self.num_qubits
                    )));
                }
                if list[..i].contains(&q) {
                    return Err(GenomeError::Invariant(format!("{name} qubit {q} repeated")));
                }
            }
        }
        Ok(())
    }

    fn check_gate(&self, gate: &GateSpec) -> Result<(), GenomeError> {
        gate.check()?;
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(GenomeError::Invariant(format!(
                "gate {} uses qubit {q} outside a {}-qubit register",
                gate.innovation, self.num_qubits
            )));
        }
        if self.gates.iter().any(|g| g.innovation == gate.innovation) {
            return Err(GenomeError::Invariant(format!(
                "innovation {} already present",
                gate.innovation
            )));
        }
        Ok(())
    }

    pub fn genome_id(&self) -> u64 {
        self.genome_id
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn input_qubits(&self) -> &[usize] {
        &self.input_qubits
    }

    pub fn output_qubits(&self) -> &[usize] {
        &self.output_qubits
    }

    /// All gates, sorted by (depth, innovation).
    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn enabled_gates(&self) -> impl DoubleEndedIterator<Item = &GateSpec> + '_ {
        self.gates.iter().filter(|g| g.enabled)
    }

    pub fn num_enabled_gates(&self) -> usize {
        self.enabled_gates().count()
    }

    pub fn gate(&self, innovation: u64) -> Option<&GateSpec> {
        self.gates.iter().find(|g| g.innovation == innovation)
    }

    pub fn max_innovation(&self) -> Option<u64> {
        self.gates.iter().map(|g| g.innovation).max()
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn lineage(&self) -> &Lineage {
        &self.lineage
    }

    pub fn set_genome_id(&mut self, id: u64) {
        self.genome_id = id;
    }

    pub fn set_fitness(&mut self, fitness: Option<f64>) {
        self.fitness = fitness;
    }

    pub fn set_lineage(&mut self, lineage: Lineage) {
        self.lineage = lineage;
    }

    /// Same registers and identity, no gates, no fitness.
    pub(crate) fn emptied(&self) -> Self {
        CircuitGenome {
            gates: Vec::new(),
            fitness: None,
            ..self.clone()
        }
    }

    /// Returns a copy with `gate` inserted at its sorted position.
    pub fn insert_gate(&self, gate: GateSpec) -> Result<Self, GenomeError> {
        let mut out = self.clone();
        out.push_gate(gate)?;
        Ok(out)
    }

    pub(crate) fn push_gate(&mut self, gate: GateSpec) -> Result<(), GenomeError> {
        self.check_gate(&gate)?;
        let pos = self
            .gates
            .partition_point(|g| g.order_key(&gate) == Ordering::Less);
        self.gates.insert(pos, gate);
        Ok(())
    }

    pub(crate) fn gate_mut(&mut self, innovation: u64) -> Option<&mut GateSpec> {
        self.gates.iter_mut().find(|g| g.innovation == innovation)
    }

    /// True iff some input qubit influences some output qubit through the
    /// enabled gates taken in sorted order. A gate touching any marked qubit
    /// marks all of its qubits.
    pub fn is_valid(&self) -> bool {
        let mut marked = self.mask(&self.input_qubits);
        for g in self.enabled_gates() {
            propagate(&mut marked, g);
        }
        self.output_qubits.iter().any(|&q| marked[q])
    }

    /// Qubits influenced by the inputs using enabled gates with depth `< depth`.
    pub fn reachable_from_inputs(&self, depth: f64) -> BTreeSet<usize> {
        let mut marked = self.mask(&self.input_qubits);
        for g in self.enabled_gates().filter(|g| g.depth < depth) {
            propagate(&mut marked, g);
        }
        collect(&marked)
    }

    /// Qubits that influence the outputs using enabled gates with depth `>= depth`.
    pub fn connects_to_outputs(&self, depth: f64) -> BTreeSet<usize> {
        let mut marked = self.mask(&self.output_qubits);
        for g in self.enabled_gates().rev().filter(|g| g.depth >= depth) {
            propagate(&mut marked, g);
        }
        collect(&marked)
    }

    fn mask(&self, qubits: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.num_qubits];
        for &q in qubits {
            m[q] = true;
        }
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("genome serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("genome serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, GenomeError> {
        serde_json::from_str(text).map_err(|e| GenomeError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

fn propagate(marked: &mut [bool], gate: &GateSpec) {
    if gate.qubits.iter().any(|&q| marked[q]) {
        for &q in &gate.qubits {
            marked[q] = true;
        }
    }
}

fn collect(marked: &[bool]) -> BTreeSet<usize> {
    marked
        .iter()
        .enumerate()
        .filter_map(|(q, &m)| m.then_some(q))
        .collect()
}

#[derive(Clone, Serialize, Deserialize)]
struct GateRecord {
    innovation: u64,
    kind: GateKind,
    depth: f64,
    qubits: BTreeMap<String, usize>,
    params: BTreeMap<String, f64>,
    enabled: bool,
}

#[derive(Clone, Serialize, Deserialize)]
struct GenomeRecord {
    genome_id: u64,
    num_qubits: usize,
    input_qubits: Vec<usize>,
    output_qubits: Vec<usize>,
    gates: Vec<GateRecord>,
    fitness: Option<f64>,
    lineage: Lineage,
}

impl From<&GateSpec> for GateRecord {
    fn from(g: &GateSpec) -> Self {
        GateRecord {
            innovation: g.innovation,
            kind: g.kind,
            depth: g.depth,
            qubits: g
                .kind
                .slot_names()
                .zip(&g.qubits)
                .map(|(n, &q)| (n.to_string(), q))
                .collect(),
            params: g
                .kind
                .param_names()
                .iter()
                .zip(&g.params)
                .map(|(n, &p)| (n.to_string(), p))
                .collect(),
            enabled: g.enabled,
        }
    }
}

impl TryFrom<GateRecord> for GateSpec {
    type Error = GenomeError;

    fn try_from(r: GateRecord) -> Result<Self, Self::Error> {
        let slots: Vec<&str> = r.kind.slot_names().collect();
        if r.qubits.len() != slots.len() {
            return Err(GenomeError::Invariant(format!(
                "gate {} ({}) expects qubit slots {:?}",
                r.innovation, r.kind, slots
            )));
        }
        let qubits = slots
            .iter()
            .map(|s| {
                r.qubits.get(*s).copied().ok_or_else(|| {
                    GenomeError::Invariant(format!(
                        "gate {} ({}) is missing qubit slot `{s}`",
                        r.innovation, r.kind
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let names = r.kind.param_names();
        if r.params.len() != names.len() {
            return Err(GenomeError::Invariant(format!(
                "gate {} ({}) expects parameters {:?}",
                r.innovation, r.kind, names
            )));
        }
        let params = names
            .iter()
            .map(|n| {
                r.params.get(*n).copied().ok_or_else(|| {
                    GenomeError::Invariant(format!(
                        "gate {} ({}) is missing parameter `{n}`",
                        r.innovation, r.kind
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GateSpec::new(r.innovation, r.kind, r.depth, qubits, params)?.with_enabled(r.enabled))
    }
}

impl From<CircuitGenome> for GenomeRecord {
    fn from(g: CircuitGenome) -> Self {
        GenomeRecord {
            genome_id: g.genome_id,
            num_qubits: g.num_qubits,
            gates: g.gates.iter().map(GateRecord::from).collect(),
            input_qubits: g.input_qubits,
            output_qubits: g.output_qubits,
            fitness: g.fitness,
            lineage: g.lineage,
        }
    }
}

impl TryFrom<GenomeRecord> for CircuitGenome {
    type Error = GenomeError;

    fn try_from(r: GenomeRecord) -> Result<Self, Self::Error> {
        let mut g = CircuitGenome::new(r.num_qubits, r.input_qubits, r.output_qubits)?;
        g.genome_id = r.genome_id;
        g.fitness = r.fitness;
        g.lineage = r.lineage;
        for gate in r.gates {
            g.push_gate(GateSpec::try_from(gate)?)?;
        }
        Ok(g)
    }
}
