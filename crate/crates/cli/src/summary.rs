//! Per-seed result tables.

use qcevo::engine::RunReport;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub genome_id: Option<u64>,
    pub gates: Option<usize>,
    pub accuracy: Option<f64>,
    pub fidelity: Option<f64>,
    pub angular: Option<f64>,
    pub loss: Option<f64>,
}

impl SeedRow {
    pub fn from_report(r: &RunReport) -> Self {
        let best = r.best.as_ref();
        SeedRow {
            seed: r.seed,
            genome_id: best.map(|b| b.genome_id),
            gates: best.map(|b| b.genome.num_enabled_gates()),
            accuracy: best.and_then(|b| b.report.accuracy),
            fidelity: best.and_then(|b| b.report.fidelity),
            angular: best.and_then(|b| b.report.angular),
            loss: best.map(|b| b.report.loss),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub task: String,
    pub rows: Vec<SeedRow>,
    pub mean_accuracy: Option<f64>,
    pub mean_fidelity: Option<f64>,
    pub mean_angular: Option<f64>,
    pub mean_gates: Option<f64>,
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = xs.collect();
    match v {
        Some(v) if !v.is_empty() => Some(v.iter().sum::<f64>() / v.len() as f64),
        _ => None,
    }
}

impl Summary {
    pub fn new(task: &str, rows: Vec<SeedRow>) -> Self {
        Summary {
            task: task.to_string(),
            mean_accuracy: mean(rows.iter().map(|r| r.accuracy)),
            mean_fidelity: mean(rows.iter().map(|r| r.fidelity)),
            mean_angular: mean(rows.iter().map(|r| r.angular)),
            mean_gates: mean(rows.iter().map(|r| r.gates.map(|g| g as f64))),
            rows,
        }
    }

    fn is_dataset(&self) -> bool {
        self.rows.iter().any(|r| r.accuracy.is_some())
    }

    pub fn table(&self) -> String {
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let int = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
        let dataset = self.is_dataset();
        let header: Vec<&str> = if dataset {
            vec!["Seed", "Test Acc.", "# Gates", "Genome #"]
        } else {
            vec![
                "Seed",
                "Fidelity",
                "Angular Distance",
                "# Gates",
                "Genome #",
            ]
        };
        let mut body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![r.seed.to_string()];
                if dataset {
                    row.push(num(r.accuracy));
                } else {
                    row.push(num(r.fidelity));
                    row.push(num(r.angular));
                }
                row.push(int(r.gates.map(|g| g as u64)));
                row.push(int(r.genome_id));
                row
            })
            .collect();
        if self.rows.len() > 1 {
            let mut row = vec!["mean".to_string()];
            if dataset {
                row.push(num(self.mean_accuracy));
            } else {
                row.push(num(self.mean_fidelity));
                row.push(num(self.mean_angular));
            }
            row.push(self.mean_gates.map_or("-".into(), |g| format!("{g:.1}")));
            row.push(String::new());
            body.push(row);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap()
            })
            .collect();
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = format!("{}\n", self.task);
        out.push_str(&line(header.clone()));
        out.push('\n');
        for r in &body {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        out
    }
}
