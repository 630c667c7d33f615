use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use crossbeam_channel::{Receiver, Sender};
use serde::{Deserialize, Serialize};

use crate::genome::CircuitGenome;
use crate::task::TaskSpec;
use crate::trainer::{evaluate, train, FitnessReport, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkItem {
    pub genome_id: u64,
    /// 0 on first dispatch, 1 on the retry after a failure.
    pub attempt: u32,
    /// Genome JSON.
    pub genome: String,
    pub task: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkOutcome {
    /// Trained genome JSON, with the training loss as its fitness.
    Trained {
        genome: String,
        report: FitnessReport,
    },
    Failed {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    pub genome_id: u64,
    pub outcome: WorkOutcome,
    pub wall_time: f64,
}

fn run(
    item: &WorkItem,
    task: &TaskSpec,
    cfg: &TrainConfig,
) -> Result<(String, FitnessReport), String> {
    if item.task != task.name() {
        return Err(format!(
            "work item for task '{}' sent to '{}'",
            item.task,
            task.name()
        ));
    }
    let genome = CircuitGenome::from_json(&item.genome).map_err(|e| e.to_string())?;
    let outcome = train(&genome, task, cfg).map_err(|e| e.to_string())?;
    let report = evaluate(&outcome.genome, task).map_err(|e| e.to_string())?;
    Ok((outcome.genome.to_json(), report))
}

/// Trains and scores one genome. Panics are reported as failures.
pub fn process_work_item(item: &WorkItem, task: &TaskSpec, cfg: &TrainConfig) -> ResultItem {
    let start = Instant::now();
    let outcome = match catch_unwind(AssertUnwindSafe(|| run(item, task, cfg))) {
        Ok(Ok((genome, report))) => WorkOutcome::Trained { genome, report },
        Ok(Err(message)) => WorkOutcome::Failed { message },
        Err(panic) => WorkOutcome::Failed {
            message: panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "worker panicked".into()),
        },
    };
    ResultItem {
        genome_id: item.genome_id,
        outcome,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

pub(super) fn worker_loop(eval: &super::Evaluator<'_>, rx: Receiver<String>, tx: Sender<String>) {
    for msg in rx {
        let result = match serde_json::from_str::<WorkItem>(&msg) {
            Ok(item) => eval(&item),
            Err(e) => ResultItem {
                genome_id: u64::MAX,
                outcome: WorkOutcome::Failed {
                    message: e.to_string(),
                },
                wall_time: 0.0,
            },
        };
        if tx
            .send(serde_json::to_string(&result).expect("results serialize"))
            .is_err()
        {
            return;
        }
    }
}
