//! Steady-state evolution with an asynchronous master and worker threads.
//!
//! The master owns the population, the innovation counter, the genome-id
//! counter and the random stream. Workers only train and score genomes; work
//! crosses the channel as JSON text.

mod population;
mod worker;

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use crossbeam_channel::{unbounded, Receiver, Sender};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::{CircuitGenome, InnovationCounter, Lineage, Operator};
use crate::operators::{
    binary_crossover, choose_operator, exponential_crossover, mutation_chain, nary_crossover,
    OperatorChoice, OperatorConfig, RngStream, RNG_ALGORITHM,
};
use crate::task::TaskSpec;
use crate::trainer::{FitnessReport, TrainConfig};

pub use population::{Insertion, Population};
pub use worker::{process_work_item, ResultItem, WorkItem, WorkOutcome};

pub const LOG_FILE: &str = "genomes.log";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no valid candidate after {0} attempts")]
    RetryBudget(usize),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("worker channel closed")]
    Disconnected,
    #[error("population audit failed: {0}")]
    Audit(String),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> EngineError + '_ {
    move |e| EngineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub max_genomes: u64,
    pub workers: usize,
    pub seed: u64,
    /// Consecutive discarded candidates tolerated before giving up.
    pub max_retries: usize,
    /// Stop dispatching once the best training loss reaches this value.
    pub stop_loss: Option<f64>,
    pub operators: OperatorConfig,
    pub train: TrainConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 50,
            max_genomes: 500,
            workers: 1,
            seed: 0,
            max_retries: 1000,
            stop_loss: None,
            operators: OperatorConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.max_genomes < self.population_size as u64 {
            return bad("max_genomes must be at least population_size");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1");
        }
        let t = &self.train;
        if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(t.weight_decay >= 0.0 && t.weight_decay.is_finite()) {
            return bad("weight_decay must be non-negative");
        }
        if !(t.fd_step > 0.0 && t.fd_step.is_finite()) {
            return bad("fd_step must be positive");
        }
        self.operators
            .validate()
            .map_err(|e| EngineError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Evaluated,
    /// Rejected by its operator or not connecting inputs to outputs.
    Discarded,
    Failed,
}

/// One line of `genomes.log`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub genome_id: u64,
    pub status: Status,
    pub lineage: Lineage,
    /// Absent when the operator produced no child.
    pub genome: Option<CircuitGenome>,
    /// Held-out scores; present for evaluated genomes.
    pub report: Option<FitnessReport>,
    pub inserted: bool,
    pub best_genome_id: Option<u64>,
    pub best_fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorCounts {
    pub binary: usize,
    pub nary: usize,
    pub exponential: usize,
    pub mutation: usize,
}

impl OperatorCounts {
    fn bump(&mut self, c: OperatorChoice) {
        match c {
            OperatorChoice::Binary => self.binary += 1,
            OperatorChoice::Nary => self.nary += 1,
            OperatorChoice::Exponential => self.exponential += 1,
            OperatorChoice::Mutation => self.mutation += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.binary + self.nary + self.exponential + self.mutation
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub evaluated: usize,
    pub discarded: usize,
    pub failed: usize,
    pub inserted: usize,
    pub rejected: usize,
    pub redispatched: usize,
    pub operator_draws: OperatorCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub genome_id: u64,
    pub best_genome_id: u64,
    pub best_fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestGenome {
    pub genome_id: u64,
    /// Training loss.
    pub fitness: f64,
    pub report: FitnessReport,
    pub genome: CircuitGenome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: String,
    pub seed: u64,
    pub config: EvolutionConfig,
    pub best: Option<BestGenome>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stats: RunStats,
    pub genomes_assigned: u64,
    pub interrupted: bool,
    pub wall_time_secs: f64,
    /// Per-genome log; written separately as `genomes.log`.
    #[serde(default, skip_serializing)]
    pub log: Vec<LogRecord>,
}

/// The single-writer side of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Master {
    config: EvolutionConfig,
    task_name: String,
    base: CircuitGenome,
    population: Population,
    best_report: Option<FitnessReport>,
    rng_algorithm: String,
    rng: RngStream,
    innovations: InnovationCounter,
    next_id: u64,
    stats: RunStats,
    trajectory: Vec<TrajectoryPoint>,
}

impl Master {
    pub fn new(task: &TaskSpec, config: &EvolutionConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Master {
            config: config.clone(),
            task_name: task.name(),
            base: task.base_genome(),
            population: Population::new(config.population_size),
            best_report: None,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            rng: RngStream::seed_from_u64(config.seed),
            innovations: InnovationCounter::new(),
            next_id: 0,
            stats: RunStats::default(),
            trajectory: Vec::new(),
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn best_report(&self) -> Option<&FitnessReport> {
        self.best_report.as_ref()
    }

    fn best_fields(&self) -> (Option<u64>, Option<f64>) {
        let b = self.population.best_ever();
        (b.map(|g| g.genome_id()), b.and_then(|g| g.fitness()))
    }

    fn discard(
        &self,
        id: u64,
        lineage: Lineage,
        genome: Option<CircuitGenome>,
        why: &str,
    ) -> LogRecord {
        let (best_genome_id, best_fitness) = self.best_fields();
        LogRecord {
            genome_id: id,
            status: Status::Discarded,
            lineage,
            genome,
            report: None,
            inserted: false,
            best_genome_id,
            best_fitness,
            message: Some(why.to_string()),
        }
    }

    /// Members at `k` distinct uniform positions, in draw order.
    fn pick(&mut self, k: usize) -> Vec<CircuitGenome> {
        let n = self.population.len();
        sample(&mut self.rng, n, k.min(n))
            .into_iter()
            .map(|i| self.population.members()[i].clone())
            .collect()
    }

    fn build(&mut self, choice: OperatorChoice) -> (Lineage, Option<CircuitGenome>) {
        let cfg = self.config.operators.clone();
        let by_fitness = |mut v: Vec<CircuitGenome>| {
            v.sort_by(|a, b| {
                a.fitness()
                    .partial_cmp(&b.fitness())
                    .expect("finite fitness")
            });
            v
        };
        let lineage = |op, parents: &[CircuitGenome]| Lineage {
            operator: op,
            mutations: Vec::new(),
            parents: parents.iter().map(|p| p.genome_id()).collect(),
        };
        match choice {
            OperatorChoice::Mutation => {
                let parent = if self.population.is_full() {
                    let i = self.rng.gen_range(0..self.population.len());
                    self.population.members()[i].clone()
                } else {
                    self.base.clone()
                };
                let mut lin = Lineage {
                    operator: Operator::Mutation,
                    mutations: Vec::new(),
                    parents: if self.population.is_full() {
                        vec![parent.genome_id()]
                    } else {
                        Vec::new()
                    },
                };
                match mutation_chain(&parent, &cfg, &mut self.rng, &mut self.innovations) {
                    Some((child, applied)) => {
                        lin.mutations = applied;
                        (lin, Some(child))
                    }
                    None => (lin, None),
                }
            }
            OperatorChoice::Binary => {
                let ps = by_fitness(self.pick(2));
                let child = binary_crossover(&ps[0], &ps[1], &cfg, &mut self.rng);
                (lineage(Operator::BinaryCrossover, &ps), Some(child))
            }
            OperatorChoice::Nary => {
                let ps = by_fitness(self.pick(cfg.nary_parents));
                let others: Vec<&CircuitGenome> = ps[1..].iter().collect();
                let child = nary_crossover(&ps[0], &others, &cfg, &mut self.rng);
                (lineage(Operator::NaryCrossover, &ps), Some(child))
            }
            OperatorChoice::Exponential => {
                let ps = self.pick(2);
                let child = exponential_crossover(&ps[0], &ps[1], &mut self.rng);
                (lineage(Operator::ExponentialCrossover, &ps), Some(child))
            }
        }
    }

    /// Draws operators until a valid candidate appears. Every attempt takes a
    /// genome id; discarded attempts are returned as log records. Returns
    /// `None` once all `max_genomes` ids are assigned.
    pub fn generate_candidate(
        &mut self,
        discards: &mut Vec<LogRecord>,
    ) -> Result<Option<CircuitGenome>, EngineError> {
        let mut attempts = 0;
        while self.next_id < self.config.max_genomes {
            let choice = choose_operator(
                &self.config.operators.crossover_rates,
                self.population.is_full(),
                &mut self.rng,
            );
            self.stats.operator_draws.bump(choice);
            let id = self.next_id;
            self.next_id += 1;
            let (lineage, child) = self.build(choice);
            match child {
                Some(mut g) => {
                    g.set_genome_id(id);
                    g.set_fitness(None);
                    g.set_lineage(lineage.clone());
                    if g.is_valid() {
                        return Ok(Some(g));
                    }
                    discards.push(self.discard(
                        id,
                        lineage,
                        Some(g),
                        "no path from inputs to outputs",
                    ));
                }
                None => discards.push(self.discard(id, lineage, None, "operator could not apply")),
            }
            self.stats.discarded += 1;
            attempts += 1;
            if attempts >= self.config.max_retries {
                return Err(EngineError::RetryBudget(attempts));
            }
        }
        Ok(None)
    }

    /// Folds a finished evaluation into the population.
    pub fn integrate(
        &mut self,
        genome_id: u64,
        lineage: Lineage,
        outcome: Result<(CircuitGenome, FitnessReport), String>,
    ) -> Result<LogRecord, EngineError> {
        let (genome, report, inserted, message) = match outcome {
            Ok((genome, report)) => {
                let ins = self.population.try_insert(genome.clone());
                self.population.audit().map_err(EngineError::Audit)?;
                match ins {
                    Insertion::Failed => (
                        Some(genome),
                        None,
                        false,
                        Some("non-finite loss".to_string()),
                    ),
                    _ => {
                        if ins.new_best() {
                            self.best_report = Some(report.clone());
                        }
                        (Some(genome), Some(report), ins.entered(), None)
                    }
                }
            }
            Err(message) => {
                self.population.record_failure();
                (None, None, false, Some(message))
            }
        };
        let status = if report.is_some() {
            Status::Evaluated
        } else {
            Status::Failed
        };
        match status {
            Status::Evaluated => {
                self.stats.evaluated += 1;
                if inserted {
                    self.stats.inserted += 1;
                } else {
                    self.stats.rejected += 1;
                }
            }
            _ => self.stats.failed += 1,
        }
        let (best_genome_id, best_fitness) = self.best_fields();
        if let (Some(id), Some(f), Status::Evaluated) = (best_genome_id, best_fitness, status) {
            self.trajectory.push(TrajectoryPoint {
                genome_id,
                best_genome_id: id,
                best_fitness: f,
            });
        }
        Ok(LogRecord {
            genome_id,
            status,
            lineage,
            genome,
            report,
            inserted,
            best_genome_id,
            best_fitness,
            message,
        })
    }

    fn reached_stop_loss(&self) -> bool {
        match (
            self.config.stop_loss,
            self.population.best_ever().and_then(|b| b.fitness()),
        ) {
            (Some(target), Some(best)) => best <= target,
            _ => false,
        }
    }

    fn report(&self, log: Vec<LogRecord>, interrupted: bool, wall_time_secs: f64) -> RunReport {
        let best = self.population.best_ever().map(|g| BestGenome {
            genome_id: g.genome_id(),
            fitness: g.fitness().unwrap_or(f64::NAN),
            report: self.best_report.clone().expect("best genome has a report"),
            genome: g.clone(),
        });
        RunReport {
            task: self.task_name.clone(),
            seed: self.config.seed,
            config: self.config.clone(),
            best,
            trajectory: self.trajectory.clone(),
            stats: self.stats.clone(),
            genomes_assigned: self.next_id,
            interrupted,
            wall_time_secs,
            log,
        }
    }
}

/// Run-time options that do not affect results.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for `genomes.log` and `checkpoint.json`.
    pub out_dir: Option<PathBuf>,
    /// Continue from the checkpoint in `out_dir`.
    pub resume: bool,
    /// Set from outside (e.g. on Ctrl-C) to stop after flushing a checkpoint.
    pub stop: Option<Arc<AtomicBool>>,
    /// Behaves like an interrupt after this many integrated results.
    pub halt_after: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    master: Master,
    log_lines: usize,
    in_flight: Vec<WorkItem>,
}

struct Output {
    dir: PathBuf,
    log: File,
    lines: usize,
}

impl Output {
    fn append(&mut self, rec: &LogRecord) -> Result<(), EngineError> {
        let path = self.dir.join(LOG_FILE);
        let line = serde_json::to_string(rec).expect("log records serialize");
        writeln!(self.log, "{line}").map_err(io_err(&path))?;
        self.log.flush().map_err(io_err(&path))?;
        self.lines += 1;
        Ok(())
    }

    fn checkpoint(&self, master: &Master, in_flight: &[WorkItem]) -> Result<(), EngineError> {
        let path = self.dir.join(CHECKPOINT_FILE);
        let tmp = self.dir.join("checkpoint.json.tmp");
        let cp = Checkpoint {
            master: master.clone(),
            log_lines: self.lines,
            in_flight: in_flight.to_vec(),
        };
        fs::write(
            &tmp,
            serde_json::to_vec(&cp).expect("checkpoint serializes"),
        )
        .map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }
}

/// Reads `genomes.log`, skipping nothing: every line must parse.
pub fn read_log(path: &Path) -> Result<Vec<LogRecord>, EngineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let rec = serde_json::from_str(&line).map_err(|e| {
            EngineError::Checkpoint(format!("{} line {}: {e}", path.display(), i + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn resume_state(
    dir: &Path,
    task: &TaskSpec,
    config: &EvolutionConfig,
) -> Result<(Master, Vec<LogRecord>, Vec<WorkItem>), EngineError> {
    let cp_path = dir.join(CHECKPOINT_FILE);
    let text = fs::read_to_string(&cp_path).map_err(io_err(&cp_path))?;
    let cp: Checkpoint =
        serde_json::from_str(&text).map_err(|e| EngineError::Checkpoint(e.to_string()))?;
    if cp.master.rng_algorithm != RNG_ALGORITHM {
        return Err(EngineError::Checkpoint(format!(
            "unknown rng '{}'",
            cp.master.rng_algorithm
        )));
    }
    let mut saved = cp.master.config.clone();
    saved.workers = config.workers;
    if &saved != config || cp.master.task_name != task.name() {
        return Err(EngineError::Checkpoint(
            "configuration differs from the checkpointed run".into(),
        ));
    }
    let mut log = read_log(&dir.join(LOG_FILE))?;
    if log.len() < cp.log_lines {
        return Err(EngineError::Checkpoint(
            "log is shorter than the checkpoint expects".into(),
        ));
    }
    log.truncate(cp.log_lines);
    let mut master = cp.master;
    master.config.workers = config.workers;
    Ok((master, log, cp.in_flight))
}

fn open_output(dir: &Path, log: &[LogRecord]) -> Result<Output, EngineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(LOG_FILE);
    // Rewrite so the file holds exactly the checkpointed records.
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(true)
        .open(&path)
        .map_err(io_err(&path))?;
    for rec in log {
        writeln!(
            file,
            "{}",
            serde_json::to_string(rec).expect("log records serialize")
        )
        .map_err(io_err(&path))?;
    }
    Ok(Output {
        dir: dir.to_path_buf(),
        log: file,
        lines: log.len(),
    })
}

pub fn run_evolution(task: &TaskSpec, config: &EvolutionConfig) -> Result<RunReport, EngineError> {
    run_evolution_with(task, config, &RunOptions::default())
}

pub fn run_evolution_with(
    task: &TaskSpec,
    config: &EvolutionConfig,
    opts: &RunOptions,
) -> Result<RunReport, EngineError> {
    let eval = |item: &WorkItem| process_work_item(item, task, &config.train);
    run_evolution_custom(task, config, opts, &eval)
}

/// Worker-side evaluation of one item.
pub type Evaluator<'a> = dyn Fn(&WorkItem) -> ResultItem + Sync + 'a;

/// Like [`run_evolution_with`] with a caller-supplied worker evaluation.
pub fn run_evolution_custom(
    task: &TaskSpec,
    config: &EvolutionConfig,
    opts: &RunOptions,
    eval: &Evaluator<'_>,
) -> Result<RunReport, EngineError> {
    config.validate()?;
    let started = Instant::now();
    let (mut master, mut log, pending) = match (&opts.out_dir, opts.resume) {
        (Some(dir), true) => resume_state(dir, task, config)?,
        (None, true) => {
            return Err(EngineError::Config(
                "resume needs an output directory".into(),
            ))
        }
        _ => (Master::new(task, config)?, Vec::new(), Vec::new()),
    };
    let mut output = match &opts.out_dir {
        Some(dir) => Some(open_output(dir, &log)?),
        None => None,
    };

    let task_name = task.name();
    let (work_tx, work_rx) = unbounded::<String>();
    let (result_tx, result_rx) = unbounded::<String>();

    let interrupted = std::thread::scope(|scope| -> Result<bool, EngineError> {
        for _ in 0..config.workers {
            let rx = work_rx.clone();
            let tx = result_tx.clone();
            scope.spawn(move || worker::worker_loop(eval, rx, tx));
        }
        drop(result_tx);
        let mut lp = Loop {
            master: &mut master,
            log: &mut log,
            output: &mut output,
            in_flight: Vec::new(),
            work_tx: &work_tx,
            result_rx: &result_rx,
            task_name: &task_name,
            integrated: 0,
        };
        let interrupted = pending
            .into_iter()
            .try_for_each(|item| lp.send(item))
            .and_then(|_| lp.run(opts));
        // Closing the queue lets the workers exit before the scope joins them.
        drop(work_tx);
        interrupted
    })?;

    Ok(master.report(log, interrupted, started.elapsed().as_secs_f64()))
}

struct Loop<'a> {
    master: &'a mut Master,
    log: &'a mut Vec<LogRecord>,
    output: &'a mut Option<Output>,
    in_flight: Vec<WorkItem>,
    work_tx: &'a Sender<String>,
    result_rx: &'a Receiver<String>,
    task_name: &'a str,
    integrated: usize,
}

impl Loop<'_> {
    fn record(&mut self, rec: LogRecord) -> Result<(), EngineError> {
        if let Some(out) = self.output.as_mut() {
            out.append(&rec)?;
        }
        self.log.push(rec);
        Ok(())
    }

    fn checkpoint(&self) -> Result<(), EngineError> {
        match self.output.as_ref() {
            Some(out) => out.checkpoint(self.master, &self.in_flight),
            None => Ok(()),
        }
    }

    fn send(&mut self, item: WorkItem) -> Result<(), EngineError> {
        let msg = serde_json::to_string(&item).expect("work items serialize");
        self.work_tx
            .send(msg)
            .map_err(|_| EngineError::Disconnected)?;
        self.in_flight.push(item);
        Ok(())
    }

    fn stop_requested(&self, opts: &RunOptions) -> bool {
        opts.stop.as_ref().is_some_and(|s| s.load(Ordering::SeqCst))
            || opts.halt_after.is_some_and(|n| self.integrated >= n)
    }

    /// Returns whether the run was interrupted.
    fn run(&mut self, opts: &RunOptions) -> Result<bool, EngineError> {
        let workers = self.master.config.workers;
        let mut exhausted = false;
        loop {
            if self.stop_requested(opts) {
                self.checkpoint()?;
                return Ok(true);
            }
            while !exhausted && self.in_flight.len() < workers && !self.master.reached_stop_loss() {
                let mut discards = Vec::new();
                let candidate = self.master.generate_candidate(&mut discards);
                for d in discards {
                    self.record(d)?;
                }
                match candidate? {
                    Some(g) => self.send(WorkItem {
                        genome_id: g.genome_id(),
                        attempt: 0,
                        genome: g.to_json(),
                        task: self.task_name.to_string(),
                    })?,
                    None => exhausted = true,
                }
            }
            self.checkpoint()?;
            if self.in_flight.is_empty() {
                return Ok(false);
            }
            let msg = self
                .result_rx
                .recv()
                .map_err(|_| EngineError::Disconnected)?;
            let result: ResultItem = serde_json::from_str(&msg).expect("worker results parse");
            self.handle(result)?;
        }
    }

    fn handle(&mut self, result: ResultItem) -> Result<(), EngineError> {
        let pos = self
            .in_flight
            .iter()
            .position(|w| w.genome_id == result.genome_id)
            .expect("result matches an in-flight item");
        let item = self.in_flight.remove(pos);
        let sent = CircuitGenome::from_json(&item.genome).expect("dispatched genomes parse");
        let outcome = match result.outcome {
            WorkOutcome::Trained { genome, report } => match CircuitGenome::from_json(&genome) {
                Ok(g) => Ok((g, report)),
                Err(e) => Err(format!("unreadable result: {e}")),
            },
            WorkOutcome::Failed { message } => Err(message),
        };
        if outcome.is_err() && item.attempt == 0 {
            self.master.stats.redispatched += 1;
            return self.send(WorkItem { attempt: 1, ..item });
        }
        let rec = self
            .master
            .integrate(item.genome_id, sent.lineage().clone(), outcome)?;
        self.integrated += 1;
        self.record(rec)
    }
}
