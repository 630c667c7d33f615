//! Gradient-based training of a genome's gate parameters.

mod program;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::CircuitGenome;
use crate::task::TaskSpec;

use program::{Program, Split};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("genome does not fit the task: {0}")]
    Mismatch(String),
    #[error("genome is not valid: no input reaches an output")]
    Invalid,
    #[error("non-finite loss at epoch {epoch}")]
    NonFinite { epoch: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Reverse-mode differentiation through the statevector.
    Adjoint,
    ParameterShift,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub gradient_mode: GradientMode,
    pub fd_step: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 0.001,
            weight_decay: 0.0001,
            gradient_mode: GradientMode::Adjoint,
            fd_step: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

/// Flat view of the parameters of all enabled parameterized gates, in
/// genome order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    entries: Vec<(u64, &'static str)>,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn from_genome(genome: &CircuitGenome) -> Self {
        let mut entries = Vec::new();
        let mut values = Vec::new();
        for g in genome.enabled_gates() {
            for (name, &v) in g.kind().param_names().iter().zip(g.params()) {
                entries.push((g.innovation(), *name));
                values.push(v);
            }
        }
        ParamVector { entries, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(innovation, parameter name)` of each slot.
    pub fn entries(&self) -> &[(u64, &'static str)] {
        &self.entries
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        ParamVector {
            entries: self.entries.clone(),
            values,
        }
    }

    /// Writes the values back into a copy of `genome`.
    pub fn apply_to(&self, genome: &CircuitGenome) -> CircuitGenome {
        let mut out = genome.clone();
        for (inn, start) in self.offsets() {
            let gate = out
                .gate_mut(inn)
                .expect("parameter refers to a gate of this genome");
            let n = gate.kind().num_params();
            gate.set_params(&self.values[start..start + n]);
        }
        out
    }

    /// First slot of each gate.
    fn offsets(&self) -> HashMap<u64, usize> {
        let mut map = HashMap::new();
        for (i, (inn, _)) in self.entries.iter().enumerate() {
            map.entry(*inn).or_insert(i);
        }
        map
    }
}

/// Scores reported for a trained genome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub loss: f64,
    pub accuracy: Option<f64>,
    pub fidelity: Option<f64>,
    pub angular: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub genome: CircuitGenome,
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
}

fn compile(
    genome: &CircuitGenome,
    task: &TaskSpec,
    split: Split,
) -> Result<(Program, ParamVector), TrainError> {
    if !genome.is_valid() {
        return Err(TrainError::Invalid);
    }
    let params = ParamVector::from_genome(genome);
    let program = Program::compile(genome, task, &params, split)?;
    Ok((program, params))
}

/// Training loss: mean cross-entropy over the training rows, or the mean
/// teacher loss over the probes.
pub fn task_loss(genome: &CircuitGenome, task: &TaskSpec) -> Result<f64, TrainError> {
    let (program, params) = compile(genome, task, Split::Train)?;
    Ok(program.loss(params.values()))
}

/// Gradient of [`task_loss`] with respect to the genome's parameters.
pub fn gradient(
    genome: &CircuitGenome,
    task: &TaskSpec,
    cfg: &TrainConfig,
) -> Result<ParamVector, TrainError> {
    let (program, params) = compile(genome, task, Split::Train)?;
    let (_, grad) = loss_and_gradient(&program, params.values(), cfg);
    Ok(params.with_values(grad))
}

fn loss_and_gradient(program: &Program, values: &[f64], cfg: &TrainConfig) -> (f64, Vec<f64>) {
    if values.is_empty() {
        return (program.loss(values), Vec::new());
    }
    match cfg.gradient_mode {
        GradientMode::Adjoint => program.loss_and_gradient_adjoint(values),
        GradientMode::ParameterShift => program.loss_and_gradient_shift(values, cfg.fd_step),
        GradientMode::FiniteDifference => program.loss_and_gradient_fd(values, cfg.fd_step),
    }
}

/// Adam with decoupled weight decay.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    wd: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(cfg: &TrainConfig, len: usize) -> Self {
        Adam {
            lr: cfg.learning_rate,
            wd: cfg.weight_decay,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_eps,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..theta.len() {
            theta[i] *= 1.0 - self.lr * self.wd;
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            theta[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Full-batch Adam for `cfg.epochs` steps. Returns the best iterate seen;
/// the history holds the loss before every step and after the last one.
pub fn train(
    genome: &CircuitGenome,
    task: &TaskSpec,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    let (program, params) = compile(genome, task, Split::Train)?;
    let mut theta = params.values().to_vec();
    let mut adam = Adam::new(cfg, theta.len());
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let mut best = (f64::INFINITY, theta.clone());

    for epoch in 0..=cfg.epochs {
        let last = epoch == cfg.epochs;
        let (loss, grad) = if last || theta.is_empty() {
            (program.loss(&theta), Vec::new())
        } else {
            loss_and_gradient(&program, &theta, cfg)
        };
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(TrainError::NonFinite { epoch });
        }
        history.push(loss);
        if loss < best.0 {
            best = (loss, theta.clone());
        }
        if !last && !theta.is_empty() {
            adam.step(&mut theta, &grad);
        }
    }

    let mut trained = params.with_values(best.1).apply_to(genome);
    trained.set_fitness(Some(best.0));
    Ok(TrainOutcome {
        genome: trained,
        final_loss: best.0,
        loss_history: history,
    })
}

/// Scores a genome: test-split loss and accuracy for datasets, mean loss,
/// fidelity and angular distance over the probes for teachers.
pub fn evaluate(genome: &CircuitGenome, task: &TaskSpec) -> Result<FitnessReport, TrainError> {
    let (program, params) = compile(genome, task, Split::Test)?;
    let ev = program.evaluate(params.values());
    Ok(match task {
        TaskSpec::Dataset(_) => FitnessReport {
            loss: ev.loss,
            accuracy: Some(ev.correct as f64 / program.num_samples().max(1) as f64),
            fidelity: None,
            angular: None,
        },
        TaskSpec::Teacher(_) => FitnessReport {
            loss: ev.loss,
            accuracy: None,
            fidelity: Some(ev.fidelity),
            angular: Some(ev.angular),
        },
    })
}
