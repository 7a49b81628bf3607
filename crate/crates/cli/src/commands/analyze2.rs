//! `analyze2`: region × cumulative-window ablation of the baseline spec.

use serde::{Deserialize, Serialize};

use crossind_core::analysis::{run_ablation, AblationCell, AblationSummary};
use crossind_core::dataset::{Region, WindowSpec};
use crossind_core::harness::{mean, sample_sd};

use super::baseline::BaselineReport;
use super::{corpus, eval_config};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, write_atomic, write_json, CsvOut};
use crate::svg;

pub const TABLE_FILE: &str = "analysis2.csv";
pub const TABLE_SCHEMA: &str = "analysis2-v1";
pub const CELLS_FILE: &str = "ablation_cells.csv";
pub const CELLS_SCHEMA: &str = "ablation-cells-v1";
pub const REPORT_FILE: &str = "analysis2.json";
pub const FIGURE_FILE: &str = "ablation.svg";

/// The baseline's own R² for the same spec, to set beside the control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReference {
    pub r2: Vec<f64>,
    pub mean_r2: f64,
    pub sd_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis2Report {
    pub schema: String,
    pub spec: String,
    pub pitchers: usize,
    pub repeats: usize,
    /// Grid fits; the control adds `repeats × pitchers` more.
    pub trainings: usize,
    pub summary: Vec<AblationSummary>,
    pub cells: Vec<AblationCell>,
    pub control: Vec<AblationCell>,
    pub control_summary: AblationSummary,
    pub baseline: BaselineReference,
}

pub fn figure(summary: &[AblationSummary]) -> String {
    let series: Vec<svg::BandSeries> = Region::ABLATION
        .iter()
        .map(|&region| svg::BandSeries {
            name: region.to_string(),
            points: summary
                .iter()
                .filter(|s| s.region == region)
                .map(|s| (s.window.index() as f64, s.mean_r2, s.sd_r2))
                .collect(),
        })
        .collect();
    svg::lines(
        "Cross-individual R² by body region and time window",
        "cumulative window (x10 frames)",
        "R²",
        &series,
    )
}

pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let baseline = BaselineReport::load(&config.out)?;
    let spec = baseline.best_spec()?;
    let corpus = corpus(config)?;
    log::info!(
        "analyze2: {spec}, 5 regions x {} windows x {} repeat(s) on {} pitchers",
        WindowSpec::COUNT,
        config.repeats,
        corpus.len()
    );
    let result = run_ablation(&corpus, spec, &eval_config(config), &Region::ABLATION, config.repeats)?;

    let reference: Vec<f64> = baseline
        .evaluations
        .iter()
        .filter(|e| e.spec == spec)
        .map(|e| e.r2)
        .collect();

    let mut table = CsvOut::new(&["schema", "region", "window", "frames", "mean_r2", "sd_r2", "repeats"]);
    for s in &result.summary {
        table.row([
            TABLE_SCHEMA.to_string(),
            s.region.to_string(),
            s.window.index().to_string(),
            s.window.frames().to_string(),
            num(s.mean_r2),
            num(s.sd_r2),
            s.repeats.to_string(),
        ]);
    }
    let mut cells = CsvOut::new(&["schema", "kind", "region", "window", "repeat", "r2"]);
    for (kind, list) in [("grid", &result.cells), ("control", &result.control)] {
        for c in list {
            cells.row([
                CELLS_SCHEMA.to_string(),
                kind.to_string(),
                c.region.to_string(),
                c.window.index().to_string(),
                c.repeat.to_string(),
                num(c.r2),
            ]);
        }
    }

    let figure = figure(&result.summary);
    let report = Analysis2Report {
        schema: TABLE_SCHEMA.into(),
        spec: spec.to_string(),
        pitchers: corpus.len(),
        repeats: config.repeats,
        trainings: result.trainings(corpus.len()),
        summary: result.summary,
        cells: result.cells,
        control: result.control,
        control_summary: result.control_summary,
        baseline: BaselineReference {
            mean_r2: mean(&reference),
            sd_r2: sample_sd(&reference),
            r2: reference,
        },
    };
    table.finish(&config.out.join(TABLE_FILE))?;
    cells.finish(&config.out.join(CELLS_FILE))?;
    write_atomic(&config.out.join(FIGURE_FILE), figure.as_bytes())?;
    write_json(&config.out.join(REPORT_FILE), &report)?;
    Ok(vec![
        TABLE_FILE.into(),
        CELLS_FILE.into(),
        FIGURE_FILE.into(),
        REPORT_FILE.into(),
    ])
}
