//! `baseline`: model selection over the grid, then the within-individual
//! split for the chosen spec.

use serde::{Deserialize, Serialize};

use crossind_core::harness::{evaluate_within, select_baseline, write_results_csv, BaselineRow, EvaluationResult};
use crossind_core::models::ModelSpec;

use super::{corpus, eval_config};
use crate::config::RunConfig;
use crate::error::{runtime, CliError};
use crate::output::{num, read_json, write_json, CsvOut};

pub const TABLE_FILE: &str = "baseline.csv";
pub const TABLE_SCHEMA: &str = "baseline-v1";
pub const REPORT_FILE: &str = "baseline.json";
pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinSummary {
    pub r2: f64,
    pub r2_pitcher_means: f64,
    pub epochs_run: usize,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub schema: String,
    pub pitchers: usize,
    pub samples: usize,
    pub repeats: usize,
    /// Grid order.
    pub rows: Vec<BaselineRow>,
    pub best: String,
    /// Mean and SD of the best spec's cross-individual R² over repeats.
    pub cross_r2: f64,
    pub cross_r2_sd: f64,
    pub within: WithinSummary,
    pub evaluations: Vec<EvaluationResult>,
}

impl BaselineReport {
    pub fn best_spec(&self) -> Result<ModelSpec, CliError> {
        self.best.parse().map_err(|e| runtime(REPORT_FILE, e))
    }

    /// The best spec's evaluation for `repeat`.
    pub fn best_evaluation(&self, repeat: usize) -> Result<&EvaluationResult, CliError> {
        let best = self.best_spec()?;
        self.evaluations
            .iter()
            .find(|e| e.spec == best && e.repeat == repeat)
            .ok_or_else(|| CliError::Runtime(format!("{REPORT_FILE}: no evaluation of {best} for repeat {repeat}")))
    }

    pub fn load(dir: &std::path::Path) -> Result<Self, CliError> {
        let path = dir.join(REPORT_FILE);
        if !path.exists() {
            return Err(CliError::Runtime(format!(
                "{} not found; run `crossind baseline` with the same --out first",
                path.display()
            )));
        }
        read_json(&path)
    }
}

pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let corpus = corpus(config)?;
    let eval = eval_config(config);
    log::info!(
        "baseline: {} spec(s) x {} repeat(s) on {} pitchers",
        config.grid.len(),
        config.repeats,
        corpus.len()
    );
    let table = select_baseline(&config.grid, &corpus, &eval, config.repeats)?;
    let best_row = table
        .rows
        .iter()
        .find(|r| r.spec == table.best)
        .expect("best spec comes from the rows");
    log::info!(
        "baseline: best {} with cross-individual R² {:.3}",
        table.best,
        best_row.r2
    );
    let within = evaluate_within(table.best, &corpus, &eval)?;
    log::info!("baseline: within-individual R² {:.3}", within.r2);

    let mut csv = CsvOut::new(&[
        "schema",
        "rank",
        "spec",
        "family",
        "parameters",
        "r2_mean",
        "r2_sd",
        "repeats",
    ]);
    for r in &table.rows {
        csv.row([
            TABLE_SCHEMA.to_string(),
            r.rank.to_string(),
            r.spec.to_string(),
            r.spec.family().to_string(),
            r.parameters.to_string(),
            num(r.r2),
            num(r.r2_sd),
            r.repeats.to_string(),
        ]);
    }
    let report = BaselineReport {
        schema: TABLE_SCHEMA.into(),
        pitchers: corpus.len(),
        samples: corpus.sample_count(),
        repeats: config.repeats,
        best: table.best.to_string(),
        cross_r2: best_row.r2,
        cross_r2_sd: best_row.r2_sd,
        within: WithinSummary {
            r2: within.r2,
            r2_pitcher_means: within.r2_pitcher_means,
            epochs_run: within.epochs_run,
            train_size: within.train_size,
            test_size: within.predictions.len(),
        },
        rows: table.rows.clone(),
        evaluations: table.evaluations,
    };

    let results = config.out.join(RESULTS_FILE);
    let tmp = config.out.join(format!("{RESULTS_FILE}.tmp"));
    write_results_csv(&tmp, &report.evaluations)?;
    std::fs::rename(&tmp, &results).map_err(|e| runtime(results.display(), e))?;
    csv.finish(&config.out.join(TABLE_FILE))?;
    write_json(&config.out.join(REPORT_FILE), &report)?;
    Ok(vec![TABLE_FILE.into(), RESULTS_FILE.into(), REPORT_FILE.into()])
}
