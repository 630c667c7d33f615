//! Benchmark tasks: UCI classification datasets and teacher circuits.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::{CircuitGenome, GateSpec};
use crate::objective::{self, fit_ranges, EncodedSample, LossKind, ReadoutMap};
use crate::qsim::{run_circuit, GateKind, ObservableSpec, Pauli, StateVector};
use crate::task::{DatasetTask, TaskSpec, TeacherFamily, TeacherTask};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Config(String),
}

/// Static description of a supported dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub num_features: usize,
    pub num_classes: usize,
    pub num_input_qubits: usize,
    pub file_name: &'static str,
}

pub const DATASETS: [DatasetInfo; 4] = [
    DatasetInfo {
        name: "iris",
        num_features: 4,
        num_classes: 3,
        num_input_qubits: 6,
        file_name: "iris.csv",
    },
    DatasetInfo {
        name: "seeds",
        num_features: 7,
        num_classes: 3,
        num_input_qubits: 7,
        file_name: "seeds.csv",
    },
    DatasetInfo {
        name: "wine",
        num_features: 13,
        num_classes: 3,
        num_input_qubits: 7,
        file_name: "wine.csv",
    },
    DatasetInfo {
        name: "breast_cancer",
        num_features: 30,
        num_classes: 2,
        num_input_qubits: 8,
        file_name: "breast_cancer.csv",
    },
];

pub fn dataset_info(name: &str) -> Result<&'static DatasetInfo, BenchError> {
    DATASETS.iter().find(|d| d.name == name).ok_or_else(|| {
        let known: Vec<&str> = DATASETS.iter().map(|d| d.name).collect();
        BenchError::Config(format!(
            "unknown dataset '{name}' (known: {})",
            known.join(", ")
        ))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub stratified: bool,
    pub split_seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            stratified: true,
            split_seed: 0,
        }
    }
}

/// Parsed CSV contents: features row by row and raw integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<i64>,
}

/// Parses comma-separated rows with the label in the last column. A first
/// line that does not parse as numbers is taken as a header.
pub fn parse_csv(text: &str, num_features: usize) -> Result<RawDataset, BenchError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = RawDataset {
        rows: Vec::new(),
        labels: Vec::new(),
    };
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| BenchError::Parse {
            line: e.position().map_or(line, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != num_features + 1 {
            return Err(BenchError::Parse {
                line,
                message: format!(
                    "expected {} columns, found {}",
                    num_features + 1,
                    record.len()
                ),
            });
        }
        let parsed: Result<Vec<f64>, _> = record
            .iter()
            .take(num_features)
            .map(str::parse::<f64>)
            .collect();
        let label = record[num_features].parse::<f64>();
        match (parsed, label) {
            (Ok(features), Ok(label)) => {
                if let Some(j) = features.iter().position(|x| !x.is_finite()) {
                    return Err(BenchError::Parse {
                        line,
                        message: format!("column {} is not finite", j + 1),
                    });
                }
                if label.fract() != 0.0 {
                    return Err(BenchError::Parse {
                        line,
                        message: format!("label '{}' is not an integer", &record[num_features]),
                    });
                }
                out.rows.push(features);
                out.labels.push(label as i64);
            }
            _ if line == 1 => continue,
            _ => {
                let bad = record
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or("");
                return Err(BenchError::Parse {
                    line,
                    message: format!("'{bad}' is not a number"),
                });
            }
        }
    }
    Ok(out)
}

/// Test indices: `round(n_c * test_fraction)` per class when stratified.
pub fn split_indices(
    labels: &[usize],
    cfg: &SplitConfig,
) -> Result<(Vec<usize>, Vec<usize>), BenchError> {
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(BenchError::Config(format!(
            "test_fraction must lie in (0, 1), got {}",
            cfg.test_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.split_seed);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        let key = if cfg.stratified { l } else { 0 };
        groups.entry(key).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut idx) in groups {
        idx.shuffle(&mut rng);
        let k = (idx.len() as f64 * cfg.test_fraction).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if train.is_empty() || test.is_empty() {
        return Err(BenchError::Config("split leaves an empty partition".into()));
    }
    Ok((train, test))
}

/// Builds a task from parsed rows. Distinct raw labels map to `0..K` in
/// ascending order.
pub fn build_dataset(
    info: &DatasetInfo,
    raw: &RawDataset,
    split: &SplitConfig,
    num_input_qubits: Option<usize>,
) -> Result<DatasetTask, BenchError> {
    let distinct: Vec<i64> = {
        let mut v = raw.labels.clone();
        v.sort_unstable();
        v.dedup();
        v
    };
    if distinct.len() != info.num_classes {
        return Err(BenchError::Config(format!(
            "{} expects {} classes, found {}",
            info.name,
            info.num_classes,
            distinct.len()
        )));
    }
    let labels: Vec<usize> = raw
        .labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label is present"))
        .collect();
    let q = num_input_qubits.unwrap_or(info.num_input_qubits);
    if q == 0 {
        return Err(BenchError::Config(
            "at least one input qubit is required".into(),
        ));
    }
    let r = ReadoutMap::qubits_for(info.num_classes);
    let readout = ReadoutMap::new((q..q + r).collect(), info.num_classes)
        .map_err(|e| BenchError::Config(e.to_string()))?;

    let (train_indices, test_indices) = split_indices(&labels, split)?;
    let ranges = fit_ranges(train_indices.iter().map(|&i| raw.rows[i].as_slice()));
    let encode = |idx: &[usize]| -> Vec<EncodedSample> {
        idx.iter()
            .map(|&i| EncodedSample::new(raw.rows[i].clone(), &ranges, labels[i]))
            .collect()
    };
    Ok(DatasetTask {
        name: info.name.to_string(),
        num_classes: info.num_classes,
        num_input_qubits: q,
        readout,
        train: encode(&train_indices),
        test: encode(&test_indices),
        ranges,
        train_indices,
        test_indices,
    })
}

pub fn load_dataset(
    name: &str,
    csv_path: &Path,
    split: &SplitConfig,
) -> Result<DatasetTask, BenchError> {
    load_dataset_with_qubits(name, csv_path, split, None)
}

pub fn load_dataset_with_qubits(
    name: &str,
    csv_path: &Path,
    split: &SplitConfig,
    num_input_qubits: Option<usize>,
) -> Result<DatasetTask, BenchError> {
    let info = dataset_info(name)?;
    let text = std::fs::read_to_string(csv_path).map_err(|e| BenchError::Io {
        path: csv_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let raw = parse_csv(&text, info.num_features)?;
    build_dataset(info, &raw, split, num_input_qubits)
}

impl TeacherFamily {
    pub const ALL: [TeacherFamily; 4] = [
        TeacherFamily::BaselineSingleGate,
        TeacherFamily::BellGenerator,
        TeacherFamily::InputControlled,
        TeacherFamily::MultiLayer,
    ];

    pub fn min_qubits(self) -> usize {
        match self {
            TeacherFamily::BaselineSingleGate => 1,
            TeacherFamily::BellGenerator => 2,
            TeacherFamily::InputControlled | TeacherFamily::MultiLayer => 3,
        }
    }

    pub fn default_qubits(self) -> usize {
        match self {
            TeacherFamily::BaselineSingleGate => 1,
            TeacherFamily::BellGenerator => 2,
            TeacherFamily::InputControlled | TeacherFamily::MultiLayer => 3,
        }
    }

    /// Task name, e.g. `bell_teacher`.
    pub fn task_name(self) -> &'static str {
        match self {
            TeacherFamily::BaselineSingleGate => "baseline_teacher",
            TeacherFamily::BellGenerator => "bell_teacher",
            TeacherFamily::InputControlled => "input_controlled_teacher",
            TeacherFamily::MultiLayer => "multi_layer_teacher",
        }
    }
}

/// A task selected by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskName {
    Dataset(&'static DatasetInfo),
    Teacher(TeacherFamily),
}

pub fn parse_task_name(name: &str) -> Result<TaskName, BenchError> {
    if let Some(f) = TeacherFamily::ALL.iter().find(|f| f.task_name() == name) {
        return Ok(TaskName::Teacher(*f));
    }
    let known: Vec<&str> = DATASETS
        .iter()
        .map(|d| d.name)
        .chain(TeacherFamily::ALL.iter().map(|f| f.task_name()))
        .collect();
    dataset_info(name).map(TaskName::Dataset).map_err(|_| {
        BenchError::Config(format!(
            "unknown task '{name}' (known: {})",
            known.join(", ")
        ))
    })
}

const RANDOM_PROBES: usize = 16;
const MAX_BASIS_PROBE_QUBITS: usize = 4;

fn teacher_circuit(
    family: TeacherFamily,
    n: usize,
    rng: &mut impl Rng,
) -> Result<CircuitGenome, BenchError> {
    let mut ops: Vec<(GateKind, Vec<usize>, Vec<f64>)> = Vec::new();
    match family {
        TeacherFamily::BaselineSingleGate => {
            let kinds = [GateKind::Identity, GateKind::X, GateKind::H];
            let kind = kinds[rng.gen_range(0..kinds.len())];
            ops.push((kind, vec![rng.gen_range(0..n)], vec![]));
        }
        TeacherFamily::BellGenerator => {
            ops.push((GateKind::H, vec![0], vec![]));
            ops.push((GateKind::Cx, vec![0, 1], vec![]));
        }
        TeacherFamily::InputControlled => {
            ops.push((GateKind::H, vec![0], vec![]));
            ops.push((GateKind::Cx, vec![0, 1], vec![]));
            ops.push((GateKind::Toffoli, vec![0, 1, 2], vec![]));
        }
        TeacherFamily::MultiLayer => {
            for _layer in 0..2 {
                for q in 0..n {
                    ops.push((GateKind::Ry, vec![q], vec![rng.gen_range(-PI..PI)]));
                }
                for q in 0..n - 1 {
                    ops.push((GateKind::Cx, vec![q, q + 1], vec![]));
                }
            }
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let mut g =
        CircuitGenome::new(n, all.clone(), all).map_err(|e| BenchError::Config(e.to_string()))?;
    let m = ops.len();
    for (i, (kind, qubits, params)) in ops.into_iter().enumerate() {
        let depth = (i + 1) as f64 / (m + 1) as f64;
        let gate = GateSpec::new(i as u64, kind, depth, qubits, params)
            .expect("teacher gates are well formed");
        g.push_gate(gate).expect("unique innovation");
    }
    Ok(g)
}

fn random_product_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let factors: Vec<[Complex64; 2]> = (0..n)
        .map(|_| {
            let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
            let phi = rng.gen_range(0.0..2.0 * PI);
            [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ]
        })
        .collect();
    StateVector::product(&factors)
}

/// Probe inputs: every basis state for registers of up to four qubits, then
/// random product states.
pub fn probe_states(n: usize, rng: &mut impl Rng) -> Vec<StateVector> {
    let mut probes = Vec::new();
    if n <= MAX_BASIS_PROBE_QUBITS {
        probes.extend((0..1usize << n).map(|i| StateVector::basis(n, i)));
    }
    probes.extend((0..RANDOM_PROBES).map(|_| random_product_state(n, rng)));
    probes
}

/// Builds a teacher task scored by fidelity. Observables are `Z` on each
/// qubit, used only by the observable loss.
pub fn make_teacher(
    family: TeacherFamily,
    num_qubits: usize,
    rng: &mut impl Rng,
) -> Result<TeacherTask, BenchError> {
    if num_qubits < family.min_qubits() {
        return Err(BenchError::Config(format!(
            "{} needs at least {} qubits, got {num_qubits}",
            family.task_name(),
            family.min_qubits()
        )));
    }
    let teacher = teacher_circuit(family, num_qubits, rng)?;
    let probes = probe_states(num_qubits, rng);
    let targets = probes
        .iter()
        .map(|p| run_circuit(&teacher, p).expect("teacher fits its register"))
        .collect();
    Ok(TeacherTask {
        family,
        teacher,
        probes,
        targets,
        loss: LossKind::Fidelity,
        observables: (0..num_qubits)
            .map(|q| ObservableSpec::new(Pauli::Z, q))
            .collect(),
    })
}

/// Mean scores of a candidate over a teacher's probes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeacherScores {
    pub loss: f64,
    pub fidelity: f64,
    pub angular: f64,
}

pub fn teacher_scores(
    candidate: &CircuitGenome,
    task: &TeacherTask,
) -> Result<TeacherScores, BenchError> {
    if candidate.num_qubits() != task.num_qubits() {
        return Err(BenchError::Config(format!(
            "genome has {} qubits, task needs {}",
            candidate.num_qubits(),
            task.num_qubits()
        )));
    }
    let err = |e: objective::ObjectiveError| BenchError::Config(e.to_string());
    let mut s = TeacherScores {
        loss: 0.0,
        fidelity: 0.0,
        angular: 0.0,
    };
    for (probe, target) in task.probes.iter().zip(&task.targets) {
        let out = run_circuit(candidate, probe).map_err(|e| BenchError::Config(e.to_string()))?;
        s.loss += match task.loss {
            LossKind::Fidelity => objective::fidelity_loss(&out, target),
            LossKind::Angular => objective::angular_distance(&out, target),
            LossKind::KlDivergence => {
                objective::kl_divergence(&out.probabilities(), &target.probabilities())
            }
            LossKind::ObservableMse => objective::observable_mse(&out, target, &task.observables),
            LossKind::CrossEntropy => {
                return Err(BenchError::Config(
                    "cross-entropy needs class labels".into(),
                ))
            }
        }
        .map_err(err)?;
        s.fidelity += objective::fidelity(&out, target).map_err(err)?;
        s.angular += objective::angular_distance(&out, target).map_err(err)?;
    }
    let n = task.probes.len() as f64;
    s.loss /= n;
    s.fidelity /= n;
    s.angular /= n;
    Ok(s)
}

/// Mean teacher loss of `candidate`.
pub fn teacher_fitness(candidate: &CircuitGenome, task: &TeacherTask) -> Result<f64, BenchError> {
    Ok(teacher_scores(candidate, task)?.loss)
}

/// Options for [`build_task`].
#[derive(Clone, Debug, Default)]
pub struct TaskOptions {
    pub dataset_path: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub qubits: Option<usize>,
    pub split: SplitConfig,
    pub teacher_seed: u64,
    pub teacher_loss: Option<LossKind>,
}

/// Resolves a task by name. Dataset files default to `<data_dir>/<name>.csv`.
pub fn build_task(name: &str, opts: &TaskOptions) -> Result<TaskSpec, BenchError> {
    match parse_task_name(name)? {
        TaskName::Dataset(info) => {
            let path = match (&opts.dataset_path, &opts.data_dir) {
                (Some(p), _) => p.clone(),
                (None, Some(d)) => d.join(info.file_name),
                (None, None) => PathBuf::from("data").join(info.file_name),
            };
            Ok(TaskSpec::Dataset(load_dataset_with_qubits(
                info.name,
                &path,
                &opts.split,
                opts.qubits,
            )?))
        }
        TaskName::Teacher(family) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.teacher_seed);
            let mut t = make_teacher(
                family,
                opts.qubits.unwrap_or(family.default_qubits()),
                &mut rng,
            )?;
            if let Some(loss) = opts.teacher_loss {
                if !loss.is_teacher_loss() {
                    return Err(BenchError::Config("teacher tasks need a state loss".into()));
                }
                t.loss = loss;
            }
            Ok(TaskSpec::Teacher(t))
        }
    }
}
