mod config;
mod render;
mod summary;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use qcevo::bench::build_task;
use qcevo::engine::{run_evolution_with, EngineError, RunOptions};
use qcevo::genome::CircuitGenome;
use qcevo::objective::LossKind;
use qcevo::task::TaskSpec;
use qcevo::trainer::{evaluate, GradientMode};

use config::RunConfig;
use summary::{SeedRow, Summary};

const REPORT_SCHEMA: &str = include_str!("../report.schema.json");

#[derive(Parser)]
#[command(
    name = "qcevo",
    version,
    about = "Evolve parameterized quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evolution for one or more seeds.
    Evolve(EvolveArgs),
    /// Score a saved genome on a task's test split without training.
    Eval {
        genome: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Draw a saved genome as ASCII wires.
    Render { genome: PathBuf },
    /// Print the resolved configuration as TOML.
    ShowConfig {
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Print the JSON schema of report.json.
    Schema,
}

#[derive(Args, Clone, Default)]
struct TaskArgs {
    /// TOML file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// iris, seeds, wine, breast_cancer or a *_teacher task.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    dataset_path: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    qubits: Option<usize>,
    /// Teacher loss: fidelity, angular, kl_divergence or observable_mse.
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    task: TaskArgs,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    max_genomes: Option<u64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// adjoint, parameter_shift or finite_difference.
    #[arg(long, value_parser = parse_gradient)]
    gradient: Option<GradientMode>,
    #[arg(long)]
    stop_loss: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
}

fn parse_snake<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    parse_snake(s)
}

fn parse_gradient(s: &str) -> Result<GradientMode, String> {
    parse_snake(s)
}

enum CliError {
    /// Bad configuration or input; exit code 2.
    Input(String),
    /// Failure or interruption while running; exit code 1.
    Runtime(String),
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(_) => CliError::Input(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn resolve(args: &TaskArgs) -> Result<RunConfig, CliError> {
    let mut c = match &args.config {
        Some(path) => RunConfig::from_file(path).map_err(CliError::Input)?,
        None => RunConfig::default(),
    };
    if let Some(t) = &args.task {
        c.task = t.clone();
    }
    if let Some(p) = &args.dataset_path {
        c.dataset_path = Some(p.clone());
    }
    if let Some(d) = &args.data_dir {
        c.data_dir = d.clone();
    }
    if args.qubits.is_some() {
        c.qubits = args.qubits;
    }
    if args.loss.is_some() {
        c.loss = args.loss;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    Ok(c)
}

fn load_task(c: &RunConfig, seed: u64) -> Result<TaskSpec, CliError> {
    build_task(&c.task, &c.task_options(seed)).map_err(|e| CliError::Input(e.to_string()))
}

fn load_genome(path: &Path) -> Result<CircuitGenome, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    CircuitGenome::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn evolve(args: EvolveArgs) -> Result<(), CliError> {
    let mut c = resolve(&args.task)?;
    if let Some(v) = args.seeds {
        c.seeds = v;
    }
    if let Some(v) = args.max_genomes {
        c.max_genomes = v;
    }
    if let Some(v) = args.population {
        c.population = v;
    }
    if let Some(v) = args.workers {
        c.workers = v;
    }
    if let Some(v) = args.epochs {
        c.epochs = v;
    }
    if let Some(v) = args.lr {
        c.lr = v;
    }
    if let Some(v) = args.gradient {
        c.gradient = v;
    }
    if args.stop_loss.is_some() {
        c.stop_loss = args.stop_loss;
    }
    if let Some(v) = args.out {
        c.out = v;
    }
    c.validate().map_err(CliError::Input)?;
    // Fail on a bad task before creating any output.
    load_task(&c, c.seed)?;

    let stop = Arc::new(AtomicBool::new(false));
    {
        let stop = stop.clone();
        let _ = ctrlc::set_handler(move || stop.store(true, Ordering::SeqCst));
    }

    std::fs::create_dir_all(&c.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", c.out.display())))?;
    write(&c.out.join("config.resolved"), &c.to_toml())?;

    let mut rows = Vec::new();
    for seed in c.seed..c.seed + c.seeds {
        let dir = if c.seeds == 1 {
            c.out.clone()
        } else {
            c.out.join(format!("seed_{seed}"))
        };
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        let task = load_task(&c, seed)?;
        let opts = RunOptions {
            out_dir: Some(dir.clone()),
            resume: args.resume,
            stop: Some(stop.clone()),
            halt_after: None,
        };
        eprintln!("{}: seed {seed} -> {}", c.task, dir.display());
        let report = run_evolution_with(&task, &c.evolution_config(seed), &opts)?;
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write(&dir.join("report.json"), &json)?;
        if let Some(best) = &report.best {
            write(&dir.join("best_genome.json"), &best.genome.to_json_pretty())?;
        }
        rows.push(SeedRow::from_report(&report));
        if report.interrupted {
            return Err(CliError::Runtime(format!(
                "interrupted; resume with --resume --out {}",
                c.out.display()
            )));
        }
    }
    let summary = Summary::new(&c.task, rows);
    if c.seeds > 1 {
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        write(&c.out.join("summary.json"), &json)?;
    }
    print!("{}", summary.table());
    Ok(())
}

fn check_registers(genome: &CircuitGenome, task: &TaskSpec) -> Result<(), CliError> {
    let expected = (task.num_qubits(), task.input_qubits(), task.output_qubits());
    let found = (
        genome.num_qubits(),
        genome.input_qubits().to_vec(),
        genome.output_qubits().to_vec(),
    );
    if expected != found {
        return Err(CliError::Input(format!(
            "genome does not fit task '{}': task has {} qubits (inputs {:?}, outputs {:?}), \
             genome has {} qubits (inputs {:?}, outputs {:?})",
            task.name(),
            expected.0,
            expected.1,
            expected.2,
            found.0,
            found.1,
            found.2
        )));
    }
    Ok(())
}

fn eval(path: &Path, args: &TaskArgs) -> Result<(), CliError> {
    let genome = load_genome(path)?;
    let c = resolve(args)?;
    let task = load_task(&c, c.seed)?;
    check_registers(&genome, &task)?;
    let report = evaluate(&genome, &task).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve(args) => evolve(args),
        Command::Eval { genome, task } => eval(&genome, &task),
        Command::Render { genome } => {
            print!("{}", render::render(&load_genome(&genome)?));
            Ok(())
        }
        Command::ShowConfig { task } => {
            let c = resolve(&task)?;
            c.validate().map_err(CliError::Input)?;
            print!("{}", c.to_toml());
            Ok(())
        }
        Command::Schema => {
            print!("{REPORT_SCHEMA}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
