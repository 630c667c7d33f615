//! Mutation and crossover operators.
//!
//! Operators return `None` when they cannot apply (a rejection); the caller
//! then draws another operator. Children are not checked for validity here.

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::{CircuitGenome, GateSpec, InnovationCounter, MutationKind};
use crate::qsim::{GateKind, Role};

/// The random stream driving every operator decision.
pub type RngStream = ChaCha8Rng;

/// Identifier of [`RngStream`], recorded in checkpoints.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0} rates sum to {1}, expected 1")]
    RateSum(&'static str, f64),
    #[error("{0} must lie in [0, 1], got {1}")]
    Probability(&'static str, f64),
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationRates {
    pub add_gate: f64,
    pub reorder_gate: f64,
    pub swap_qubits: f64,
    pub enable_gate: f64,
    pub disable_gate: f64,
}

impl Default for MutationRates {
    fn default() -> Self {
        MutationRates {
            add_gate: 0.70,
            reorder_gate: 0.10,
            swap_qubits: 0.10,
            enable_gate: 0.05,
            disable_gate: 0.05,
        }
    }
}

impl MutationRates {
    fn weights(&self) -> [(MutationKind, f64); 5] {
        [
            (MutationKind::AddGate, self.add_gate),
            (MutationKind::ReorderGate, self.reorder_gate),
            (MutationKind::SwapQubits, self.swap_qubits),
            (MutationKind::EnableGate, self.enable_gate),
            (MutationKind::DisableGate, self.disable_gate),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorChoice {
    Binary,
    Nary,
    Exponential,
    Mutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossoverRates {
    pub binary: f64,
    pub nary: f64,
    pub exponential: f64,
    pub mutation: f64,
}

impl Default for CrossoverRates {
    fn default() -> Self {
        CrossoverRates {
            binary: 0.10,
            nary: 0.10,
            exponential: 0.10,
            mutation: 0.70,
        }
    }
}

impl CrossoverRates {
    fn weights(&self) -> [(OperatorChoice, f64); 4] {
        [
            (OperatorChoice::Binary, self.binary),
            (OperatorChoice::Nary, self.nary),
            (OperatorChoice::Exponential, self.exponential),
            (OperatorChoice::Mutation, self.mutation),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorConfig {
    pub best_keep_rate: f64,
    pub other_keep_rate: f64,
    pub line_l1: f64,
    pub line_l2: f64,
    pub nary_parents: usize,
    pub mutation_rates: MutationRates,
    pub crossover_rates: CrossoverRates,
    pub mutations_per_call: usize,
    /// Restricts the kinds `add_gate` may draw; `None` means all 26.
    pub gate_set: Option<Vec<GateKind>>,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            best_keep_rate: 0.75,
            other_keep_rate: 0.25,
            line_l1: -1.0,
            line_l2: 0.5,
            nary_parents: 4,
            mutation_rates: MutationRates::default(),
            crossover_rates: CrossoverRates::default(),
            mutations_per_call: 2,
            gate_set: None,
        }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, p) in [
            ("best_keep_rate", self.best_keep_rate),
            ("other_keep_rate", self.other_keep_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::Probability(name, p));
            }
        }
        let m: Vec<f64> = self.mutation_rates.weights().iter().map(|w| w.1).collect();
        let c: Vec<f64> = self.crossover_rates.weights().iter().map(|w| w.1).collect();
        for (name, rates) in [("mutation", m), ("crossover", c)] {
            if let Some(&bad) = rates.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(ConfigError::Probability(name, bad));
            }
            let sum: f64 = rates.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ConfigError::RateSum(name, sum));
            }
        }
        if self.nary_parents < 2 {
            return Err(ConfigError::Other("nary_parents must be at least 2".into()));
        }
        if self.mutations_per_call == 0 {
            return Err(ConfigError::Other(
                "mutations_per_call must be at least 1".into(),
            ));
        }
        if matches!(&self.gate_set, Some(s) if s.is_empty()) {
            return Err(ConfigError::Other("gate_set must not be empty".into()));
        }
        Ok(())
    }

    pub fn gate_kinds(&self) -> &[GateKind] {
        self.gate_set.as_deref().unwrap_or(&GateKind::ALL)
    }
}

fn weighted<T: Copy>(items: &[(T, f64)], rng: &mut impl Rng) -> T {
    let total: f64 = items.iter().map(|i| i.1).sum();
    let mut x = rng.gen::<f64>() * total;
    for &(item, w) in items {
        if x < w {
            return item;
        }
        x -= w;
    }
    items
        .iter()
        .rev()
        .find(|i| i.1 > 0.0)
        .unwrap_or(&items[0])
        .0
}

pub fn choose_mutation(rates: &MutationRates, rng: &mut impl Rng) -> MutationKind {
    weighted(&rates.weights(), rng)
}

/// Operator for the next candidate; only mutation while the population is
/// still filling.
pub fn choose_operator(
    rates: &CrossoverRates,
    population_full: bool,
    rng: &mut impl Rng,
) -> OperatorChoice {
    if !population_full {
        return OperatorChoice::Mutation;
    }
    weighted(&rates.weights(), rng)
}

fn random_params(kind: GateKind, rng: &mut impl Rng) -> Vec<f64> {
    (0..kind.num_params())
        .map(|_| rng.gen_range(-PI..PI))
        .collect()
}

/// All ordered qubit assignments for `kind` whose slots respect the pools.
fn assignments(
    kind: GateKind,
    num_qubits: usize,
    pool: impl Fn(Role, usize) -> bool,
) -> Vec<Vec<usize>> {
    let roles: Vec<Role> = kind.roles().collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(roles.len());
    fn recurse(
        roles: &[Role],
        n: usize,
        pool: &dyn Fn(Role, usize) -> bool,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let slot = current.len();
        if slot == roles.len() {
            out.push(current.clone());
            return;
        }
        for q in 0..n {
            if !current.contains(&q) && pool(roles[slot], q) {
                current.push(q);
                recurse(roles, n, pool, current, out);
                current.pop();
            }
        }
    }
    recurse(&roles, num_qubits, &pool, &mut current, &mut out);
    out
}

/// Adds one gate at a uniform random depth. Control slots draw from the
/// qubits reachable from the inputs at that depth, target slots from those
/// connected to the outputs, and symmetric slots from both at once.
pub fn add_gate(
    parent: &CircuitGenome,
    kinds: &[GateKind],
    rng: &mut impl Rng,
    counter: &mut InnovationCounter,
) -> Option<CircuitGenome> {
    let depth = rng.gen();
    add_gate_at(parent, kinds, depth, rng, counter)
}

/// [`add_gate`] at a fixed depth.
pub fn add_gate_at(
    parent: &CircuitGenome,
    kinds: &[GateKind],
    depth: f64,
    rng: &mut impl Rng,
    counter: &mut InnovationCounter,
) -> Option<CircuitGenome> {
    let reach = parent.reachable_from_inputs(depth);
    let connect = parent.connects_to_outputs(depth);
    let pool = |role: Role, q: usize| match role {
        Role::Control => reach.contains(&q),
        Role::Target => connect.contains(&q),
        Role::Dual => reach.contains(&q) && connect.contains(&q),
    };
    let options: Vec<(GateKind, Vec<Vec<usize>>)> = kinds
        .iter()
        .map(|&k| (k, assignments(k, parent.num_qubits(), pool)))
        .filter(|(_, a)| !a.is_empty())
        .collect();
    let (kind, choices) = options.choose(rng)?;
    let qubits = choices.choose(rng)?.clone();
    let gate = GateSpec::new(
        counter.issue(),
        *kind,
        depth,
        qubits,
        random_params(*kind, rng),
    )
    .expect("drawn gate is well formed");
    Some(parent.insert_gate(gate).expect("fresh innovation"))
}

pub fn enable_disable_gate(
    parent: &CircuitGenome,
    enable: bool,
    rng: &mut impl Rng,
) -> Option<CircuitGenome> {
    let candidates: Vec<usize> = (0..parent.gates().len())
        .filter(|&i| parent.gates()[i].enabled() != enable)
        .collect();
    let &i = candidates.choose(rng)?;
    let mut child = parent.clone();
    let inn = child.gates()[i].innovation();
    let gate = child.gate_mut(inn).expect("index in range");
    *gate = gate.clone().with_enabled(enable);
    Some(child)
}

fn disable(child: &mut CircuitGenome, innovation: u64) {
    let gate = child.gate_mut(innovation).expect("gate present");
    *gate = gate.clone().with_enabled(false);
}

/// Disables a random enabled gate and re-inserts a copy at a new uniform depth.
pub fn reorder_gate(
    parent: &CircuitGenome,
    rng: &mut impl Rng,
    counter: &mut InnovationCounter,
) -> Option<CircuitGenome> {
    let enabled: Vec<&GateSpec> = parent.enabled_gates().collect();
    let original = (*enabled.choose(rng)?).clone();
    let mut child = parent.clone();
    disable(&mut child, original.innovation());
    let copy = original.relocated(counter.issue(), rng.gen());
    child.push_gate(copy).expect("fresh innovation");
    Some(child)
}

/// Disables a random enabled gate and re-inserts a copy with one qubit
/// reassigned, at a depth between the gate's sorted-list neighbours.
pub fn swap_qubits(
    parent: &CircuitGenome,
    rng: &mut impl Rng,
    counter: &mut InnovationCounter,
) -> Option<CircuitGenome> {
    let enabled: Vec<usize> = (0..parent.gates().len())
        .filter(|&i| parent.gates()[i].enabled())
        .collect();
    let &index = enabled.choose(rng)?;
    let gates = parent.gates();
    let original = gates[index].clone();
    let slot = rng.gen_range(0..original.qubits().len());
    let lo = if index > 0 {
        gates[index - 1].depth()
    } else {
        0.0
    };
    let hi = gates.get(index + 1).map_or(1.0, |g| g.depth());
    let depth = if hi > lo { rng.gen_range(lo..hi) } else { lo };

    let mut child = parent.clone();
    disable(&mut child, original.innovation());
    let reach = child.reachable_from_inputs(depth);
    let connect = child.connects_to_outputs(depth);
    let role = original.kind().slots()[slot].1;
    let pool: BTreeSet<usize> = match role {
        Role::Control => reach,
        Role::Target => connect,
        Role::Dual => reach.union(&connect).copied().collect(),
    };
    let choices: Vec<usize> = pool
        .into_iter()
        .filter(|q| !original.qubits().contains(q))
        .collect();
    let &qubit = choices.choose(rng)?;
    let mut copy = original.relocated(counter.issue(), depth);
    copy.set_qubit(slot, qubit);
    child.push_gate(copy).expect("fresh innovation");
    Some(child)
}

pub fn mutate(
    parent: &CircuitGenome,
    kind: MutationKind,
    cfg: &OperatorConfig,
    rng: &mut impl Rng,
    counter: &mut InnovationCounter,
) -> Option<CircuitGenome> {
    match kind {
        MutationKind::AddGate => add_gate(parent, cfg.gate_kinds(), rng, counter),
        MutationKind::ReorderGate => reorder_gate(parent, rng, counter),
        MutationKind::SwapQubits => swap_qubits(parent, rng, counter),
        MutationKind::EnableGate => enable_disable_gate(parent, true, rng),
        MutationKind::DisableGate => enable_disable_gate(parent, false, rng),
    }
}

/// Applies `mutations_per_call` randomly drawn mutations in sequence,
/// skipping rejected ones. Fails only if none succeeded.
pub fn mutation_chain(
    parent: &CircuitGenome,
    cfg: &OperatorConfig,
    rng: &mut impl Rng,
    counter: &mut InnovationCounter,
) -> Option<(CircuitGenome, Vec<MutationKind>)> {
    let mut current = parent.clone();
    let mut applied = Vec::new();
    for _ in 0..cfg.mutations_per_call {
        let kind = choose_mutation(&cfg.mutation_rates, rng);
        if let Some(next) = mutate(&current, kind, cfg, rng, counter) {
            current = next;
            applied.push(kind);
        }
    }
    (!applied.is_empty()).then_some((current, applied))
}

fn line_r(cfg: &OperatorConfig, rng: &mut impl Rng) -> f64 {
    rng.gen::<f64>() * cfg.line_l1 - cfg.line_l2
}

/// Child of two parents; `best` must be the fitter one.
pub fn binary_crossover(
    best: &CircuitGenome,
    other: &CircuitGenome,
    cfg: &OperatorConfig,
    rng: &mut impl Rng,
) -> CircuitGenome {
    let mut child = best.emptied();
    for g in best.gates() {
        match other.gate(g.innovation()) {
            Some(o) => {
                let mut gate = g.clone();
                if g.kind().is_parameterized() {
                    let r = line_r(cfg, rng);
                    let p: Vec<f64> = g
                        .params()
                        .iter()
                        .zip(o.params())
                        .map(|(&pb, &po)| po + r * (pb - po))
                        .collect();
                    gate.set_params(&p);
                }
                child.push_gate(gate).expect("unique innovation");
            }
            None => {
                if rng.gen_bool(cfg.best_keep_rate) {
                    child.push_gate(g.clone()).expect("unique innovation");
                }
            }
        }
    }
    for g in other.gates() {
        if best.gate(g.innovation()).is_none() && rng.gen_bool(cfg.other_keep_rate) {
            child.push_gate(g.clone()).expect("unique innovation");
        }
    }
    child
}

/// Child of `best` and several fitter-to-less-fit `others`.
///
/// Gates in `best` and at least one other always transfer, recombined
/// towards the others' mean; best-only gates transfer at `best_keep_rate`
/// and others-only gates at `other_keep_rate` with averaged parameters.
pub fn nary_crossover(
    best: &CircuitGenome,
    others: &[&CircuitGenome],
    cfg: &OperatorConfig,
    rng: &mut impl Rng,
) -> CircuitGenome {
    let mut child = best.emptied();
    let carriers =
        |inn: u64| -> Vec<&GateSpec> { others.iter().filter_map(|o| o.gate(inn)).collect() };
    let mean = |gates: &[&GateSpec]| -> Vec<f64> {
        // Running mean, exact when all carriers agree.
        (0..gates[0].params().len())
            .map(|k| {
                gates
                    .iter()
                    .enumerate()
                    .fold(0.0, |m, (i, g)| m + (g.params()[k] - m) / (i + 1) as f64)
            })
            .collect()
    };
    for g in best.gates() {
        let found = carriers(g.innovation());
        if found.is_empty() {
            if rng.gen_bool(cfg.best_keep_rate) {
                child.push_gate(g.clone()).expect("unique innovation");
            }
            continue;
        }
        let mut gate = g.clone();
        if g.kind().is_parameterized() {
            let r = line_r(cfg, rng);
            let avg = mean(&found);
            let p: Vec<f64> = g
                .params()
                .iter()
                .zip(&avg)
                .map(|(&pb, &pa)| pa + r * (pb - pa))
                .collect();
            gate.set_params(&p);
        }
        child.push_gate(gate).expect("unique innovation");
    }
    let mut seen = HashSet::new();
    for o in others {
        for g in o.gates() {
            let inn = g.innovation();
            if best.gate(inn).is_some() || !seen.insert(inn) {
                continue;
            }
            if rng.gen_bool(cfg.other_keep_rate) {
                let found = carriers(inn);
                let mut gate = g.clone();
                if g.kind().is_parameterized() {
                    gate.set_params(&mean(&found));
                }
                child.push_gate(gate).expect("unique innovation");
            }
        }
    }
    child
}

/// Gates of `p1` below a uniform random cut plus gates of `p2` at or above it.
pub fn exponential_crossover(
    p1: &CircuitGenome,
    p2: &CircuitGenome,
    rng: &mut impl Rng,
) -> CircuitGenome {
    exponential_crossover_at(p1, p2, rng.gen())
}

pub fn exponential_crossover_at(p1: &CircuitGenome, p2: &CircuitGenome, cut: f64) -> CircuitGenome {
    let mut child = p1.emptied();
    for g in p1.gates().iter().filter(|g| g.depth() < cut) {
        child.push_gate(g.clone()).expect("unique innovation");
    }
    for g in p2.gates().iter().filter(|g| g.depth() >= cut) {
        if child.gate(g.innovation()).is_none() {
            child.push_gate(g.clone()).expect("unique innovation");
        }
    }
    child
}
