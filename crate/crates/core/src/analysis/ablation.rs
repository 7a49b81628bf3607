//! Region × cumulative-window ablation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Corpus, Region, WindowSpec};
use crate::error::{Error, Result};
use crate::harness::{evaluate_losocv, mean, sample_sd, with_workers, EvalConfig};
use crate::models::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub region: Region,
    pub window: WindowSpec,
    pub repeat: usize,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub region: Region,
    pub window: WindowSpec,
    pub mean_r2: f64,
    /// Sample SD over repeats; zero with a single repeat.
    pub sd_r2: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub spec: ModelSpec,
    /// Region-major, then window, then repeat.
    pub cells: Vec<AblationCell>,
    pub summary: Vec<AblationSummary>,
    /// Whole body over all frames, one entry per repeat.
    pub control: Vec<AblationCell>,
    pub control_summary: AblationSummary,
}

impl AblationResult {
    /// Model fits behind the grid cells (the control excluded).
    pub fn trainings(&self, pitchers: usize) -> usize {
        self.cells.len() * pitchers
    }
}

fn summarize(cells: &[AblationCell]) -> AblationSummary {
    let r2: Vec<f64> = cells.iter().map(|x| x.r2).collect();
    AblationSummary {
        region: cells[0].region,
        window: cells[0].window,
        mean_r2: mean(&r2),
        sd_r2: sample_sd(&r2),
        repeats: cells.len(),
    }
}

/// Every `(region, window, repeat)` of the grid, in output order.
pub fn ablation_grid(regions: &[Region], repeats: usize) -> Vec<(Region, WindowSpec, usize)> {
    regions
        .iter()
        .flat_map(|&r| WindowSpec::all().flat_map(move |w| (0..repeats).map(move |k| (r, w, k))))
        .collect()
}

/// Runs leave-one-pitcher-out evaluation for every region, window and
/// repeat, plus a whole-body full-window control per repeat.
/// `config.region`, `config.window` and `config.repeat` are overridden per
/// cell.
pub fn run_ablation(
    corpus: &Corpus,
    spec: ModelSpec,
    config: &EvalConfig,
    regions: &[Region],
    repeats: usize,
) -> Result<AblationResult> {
    if repeats == 0 || regions.is_empty() {
        return Err(Error::InvalidConfig(
            "ablation needs at least one region and one repeat".into(),
        ));
    }
    let mut grid = ablation_grid(regions, repeats);
    let cell_count = grid.len();
    grid.extend((0..repeats).map(|k| (Region::WholeBody, WindowSpec::FULL, k)));
    let run = |&(region, window, repeat): &(Region, WindowSpec, usize)| -> Result<AblationCell> {
        let cfg = EvalConfig {
            region,
            window,
            repeat,
            ..config.clone()
        };
        let r2 = evaluate_losocv(spec, corpus, &cfg)
            .map_err(|e| Error::Ablation {
                region: region.to_string(),
                window: window.index(),
                repeat,
                source: Box::new(e),
            })?
            .r2;
        Ok(AblationCell {
            region,
            window,
            repeat,
            r2,
        })
    };
    let mut cells = with_workers(config.workers, || grid.par_iter().map(run).collect::<Vec<_>>())?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let control = cells.split_off(cell_count);
    let summary = cells.chunks(repeats).map(summarize).collect();
    Ok(AblationResult {
        spec,
        cells,
        summary,
        control_summary: summarize(&control),
        control,
    })
}
