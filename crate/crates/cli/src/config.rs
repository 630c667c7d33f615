//! Flat run configuration: defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use qcevo::bench::{SplitConfig, TaskOptions};
use qcevo::engine::EvolutionConfig;
use qcevo::objective::LossKind;
use qcevo::operators::{CrossoverRates, MutationRates, OperatorConfig};
use qcevo::trainer::{GradientMode, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_path: Option<PathBuf>,
    pub data_dir: PathBuf,
    /// Input qubits for datasets, register size for teachers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
    /// Teacher loss; datasets always use cross-entropy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
    pub out: PathBuf,
    pub seed: u64,
    /// Number of consecutive seeds to run, starting at `seed`.
    pub seeds: u64,

    pub population: usize,
    pub max_genomes: u64,
    pub workers: usize,
    pub max_retries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_loss: Option<f64>,

    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub gradient: GradientMode,
    pub fd_step: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,

    pub test_fraction: f64,
    pub stratified: bool,
    pub split_seed: u64,

    pub best_keep_rate: f64,
    pub other_keep_rate: f64,
    pub line_l1: f64,
    pub line_l2: f64,
    pub nary_parents: usize,
    pub mutations_per_call: usize,
    pub add_gate_rate: f64,
    pub reorder_gate_rate: f64,
    pub swap_qubits_rate: f64,
    pub enable_gate_rate: f64,
    pub disable_gate_rate: f64,
    pub binary_crossover_rate: f64,
    pub nary_crossover_rate: f64,
    pub exponential_crossover_rate: f64,
    pub mutation_rate: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let evo = EvolutionConfig::default();
        let train = TrainConfig::default();
        let ops = OperatorConfig::default();
        let split = SplitConfig::default();
        RunConfig {
            task: "iris".into(),
            dataset_path: None,
            data_dir: PathBuf::from("data"),
            qubits: None,
            loss: None,
            out: PathBuf::from("runs/latest"),
            seed: 0,
            seeds: 1,
            population: evo.population_size,
            max_genomes: evo.max_genomes,
            // One master plus eleven workers.
            workers: 11,
            max_retries: evo.max_retries,
            stop_loss: None,
            epochs: train.epochs,
            lr: train.learning_rate,
            weight_decay: train.weight_decay,
            gradient: train.gradient_mode,
            fd_step: train.fd_step,
            adam_beta1: train.adam_beta1,
            adam_beta2: train.adam_beta2,
            adam_eps: train.adam_eps,
            test_fraction: split.test_fraction,
            stratified: split.stratified,
            split_seed: split.split_seed,
            best_keep_rate: ops.best_keep_rate,
            other_keep_rate: ops.other_keep_rate,
            line_l1: ops.line_l1,
            line_l2: ops.line_l2,
            nary_parents: ops.nary_parents,
            mutations_per_call: ops.mutations_per_call,
            add_gate_rate: ops.mutation_rates.add_gate,
            reorder_gate_rate: ops.mutation_rates.reorder_gate,
            swap_qubits_rate: ops.mutation_rates.swap_qubits,
            enable_gate_rate: ops.mutation_rates.enable_gate,
            disable_gate_rate: ops.mutation_rates.disable_gate,
            binary_crossover_rate: ops.crossover_rates.binary,
            nary_crossover_rate: ops.crossover_rates.nary,
            exponential_crossover_rate: ops.crossover_rates.exponential,
            mutation_rate: ops.crossover_rates.mutation,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.lr,
            weight_decay: self.weight_decay,
            gradient_mode: self.gradient,
            fd_step: self.fd_step,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
        }
    }

    pub fn evolution_config(&self, seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.population,
            max_genomes: self.max_genomes,
            workers: self.workers,
            seed,
            max_retries: self.max_retries,
            stop_loss: self.stop_loss,
            operators: OperatorConfig {
                best_keep_rate: self.best_keep_rate,
                other_keep_rate: self.other_keep_rate,
                line_l1: self.line_l1,
                line_l2: self.line_l2,
                nary_parents: self.nary_parents,
                mutation_rates: MutationRates {
                    add_gate: self.add_gate_rate,
                    reorder_gate: self.reorder_gate_rate,
                    swap_qubits: self.swap_qubits_rate,
                    enable_gate: self.enable_gate_rate,
                    disable_gate: self.disable_gate_rate,
                },
                crossover_rates: CrossoverRates {
                    binary: self.binary_crossover_rate,
                    nary: self.nary_crossover_rate,
                    exponential: self.exponential_crossover_rate,
                    mutation: self.mutation_rate,
                },
                mutations_per_call: self.mutations_per_call,
                gate_set: None,
            },
            train: self.train_config(),
        }
    }

    /// Task options for one seed; teacher circuits are drawn from the seed.
    pub fn task_options(&self, seed: u64) -> TaskOptions {
        TaskOptions {
            dataset_path: self.dataset_path.clone(),
            data_dir: Some(self.data_dir.clone()),
            qubits: self.qubits,
            split: SplitConfig {
                test_fraction: self.test_fraction,
                stratified: self.stratified,
                split_seed: self.split_seed,
            },
            teacher_seed: seed,
            teacher_loss: self.loss,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.seeds == 0 {
            return Err("seeds must be at least 1".into());
        }
        if let Some(s) = self.stop_loss {
            if s.is_nan() {
                return Err("stop_loss must be a number".into());
            }
        }
        self.evolution_config(self.seed)
            .validate()
            .map_err(|e| e.to_string())
    }
}
