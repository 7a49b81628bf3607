//! Model selection over a grid of specs and the results table.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{evaluate_losocv, EvalConfig, EvaluationResult};
use super::metrics::{mean, sample_sd};
use crate::dataset::Corpus;
use crate::error::{Error, Result};
use crate::models::ModelSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub spec: ModelSpec,
    pub parameters: usize,
    /// Mean cross-individual R² over repeats.
    pub r2: f64,
    pub r2_sd: f64,
    pub repeats: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTable {
    /// In grid order.
    pub rows: Vec<BaselineRow>,
    pub best: ModelSpec,
    pub evaluations: Vec<EvaluationResult>,
}

/// Evaluates every spec `repeats` times and ranks by mean R²; ties go to the
/// smaller model.
pub fn select_baseline(
    grid: &[ModelSpec],
    corpus: &Corpus,
    config: &EvalConfig,
    repeats: usize,
) -> Result<BaselineTable> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty model grid".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    let mut evaluations = Vec::with_capacity(grid.len() * repeats);
    for &spec in grid {
        let mut r2s = Vec::with_capacity(repeats);
        let mut parameters = 0;
        for repeat in 0..repeats {
            let cfg = EvalConfig {
                repeat,
                ..config.clone()
            };
            let result = evaluate_losocv(spec, corpus, &cfg)?;
            r2s.push(result.r2);
            parameters = result.parameters;
            evaluations.push(result);
        }
        rows.push(BaselineRow {
            spec,
            parameters,
            r2: mean(&r2s),
            r2_sd: sample_sd(&r2s),
            repeats,
            rank: 0,
        });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[b]
            .r2
            .total_cmp(&rows[a].r2)
            .then(rows[a].parameters.cmp(&rows[b].parameters))
    });
    for (rank, &i) in order.iter().enumerate() {
        rows[i].rank = rank + 1;
    }
    Ok(BaselineTable {
        best: rows[order[0]].spec,
        rows,
        evaluations,
    })
}

pub const RESULTS_SCHEMA: &str = "results-v1";

/// One row per (spec, repeat, fold) then one summary row per evaluation.
///
/// Columns: `schema,row,spec,region,window,repeat,fold,pitcher,level,
/// true_mean,pred_mean,epochs,train_r2,r2`. Fold rows leave `r2` empty;
/// summary rows leave the per-fold columns empty.
pub fn write_results_csv(path: &Path, results: &[EvaluationResult]) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([
        "schema",
        "row",
        "spec",
        "region",
        "window",
        "repeat",
        "fold",
        "pitcher",
        "level",
        "true_mean",
        "pred_mean",
        "epochs",
        "train_r2",
        "r2",
    ])
    .map_err(io)?;
    for r in results {
        for f in &r.folds {
            w.write_record([
                RESULTS_SCHEMA.to_string(),
                "fold".into(),
                r.spec.to_string(),
                r.region.to_string(),
                r.window.index().to_string(),
                r.repeat.to_string(),
                f.fold.to_string(),
                f.test_pitcher_id.clone(),
                f.level.to_string(),
                f.mean_truth.to_string(),
                f.mean_prediction.to_string(),
                f.epochs_run.to_string(),
                f.final_train_r2.to_string(),
                String::new(),
            ])
            .map_err(io)?;
        }
    }
    for r in results {
        let mut row = vec![
            RESULTS_SCHEMA.to_string(),
            "summary".into(),
            r.spec.to_string(),
            r.region.to_string(),
            r.window.index().to_string(),
            r.repeat.to_string(),
        ];
        row.extend(std::iter::repeat_n(String::new(), 7));
        row.push(r.r2.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
