//! `report`: consolidates the completed commands in a run directory into one
//! summary plus the per-pitcher scatter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crossind_core::analysis::AblationSummary;
use crossind_core::harness::BaselineRow;

use super::analyze1::{self, Analysis1Report};
use super::analyze2::{self, Analysis2Report, BaselineReference};
use super::baseline::{BaselineReport, WithinSummary};
use super::CommandKind;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{read_json, write_atomic, write_json, RunManifest, RunStatus};
use crate::svg;

pub const REPORT_FILE: &str = "report.json";
pub const REPORT_SCHEMA: &str = "report-v1";
pub const FIGURE_FILE: &str = "pitcher_means.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEntry {
    pub command: String,
    pub seed: u64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSection {
    pub pitchers: usize,
    pub best: String,
    pub cross_r2: f64,
    pub cross_r2_sd: f64,
    pub within: WithinSummary,
    pub rows: Vec<BaselineRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis2Section {
    pub spec: String,
    pub repeats: usize,
    pub trainings: usize,
    pub summary: Vec<AblationSummary>,
    pub control_summary: AblationSummary,
    pub baseline: BaselineReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub commands: Vec<CommandEntry>,
    pub baseline: Option<BaselineSection>,
    pub analysis1: Option<Analysis1Report>,
    pub analysis2: Option<Analysis2Section>,
    pub figures: Vec<String>,
}

const SOURCES: [CommandKind; 5] = [
    CommandKind::Synth,
    CommandKind::Prep,
    CommandKind::Baseline,
    CommandKind::Analyze1,
    CommandKind::Analyze2,
];

fn completed(dir: &Path) -> Result<Vec<RunManifest>, CliError> {
    let mut found = Vec::new();
    for kind in SOURCES {
        let path = dir.join(RunManifest::file_name(kind.name(), &RunStatus::Complete));
        if path.exists() {
            found.push(read_json::<RunManifest>(&path)?);
        }
    }
    if found.is_empty() {
        let expected: Vec<String> = SOURCES
            .iter()
            .map(|k| format!("  {}", RunManifest::file_name(k.name(), &RunStatus::Complete)))
            .collect();
        return Err(CliError::Runtime(format!(
            "{}: no completed command outputs; expected at least one of:\n{}",
            dir.display(),
            expected.join("\n")
        )));
    }
    let missing: Vec<String> = found
        .iter()
        .flat_map(|m| {
            m.outputs
                .iter()
                .filter(|o| !dir.join(o).exists())
                .map(move |o| format!("  {o} (from manifest_{}.json)", m.command))
        })
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: {} referenced artifact(s) missing:\n{}",
            dir.display(),
            missing.len(),
            missing.join("\n")
        )));
    }
    Ok(found)
}

/// Per-pitcher true vs predicted mean speed, one series per level.
pub fn figure(report: &BaselineReport) -> Result<String, CliError> {
    let evaluation = report.best_evaluation(0)?;
    let mut series: Vec<svg::Series> = Vec::new();
    for fold in &evaluation.folds {
        let name = fold.level.to_string();
        let point = (fold.mean_truth, fold.mean_prediction);
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push(point),
            None => series.push(svg::Series {
                name,
                points: vec![point],
            }),
        }
    }
    series.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(svg::scatter(
        &format!("Per-pitcher mean ball speed, {}", report.best),
        "true (mph)",
        "predicted (mph)",
        &series,
    ))
}

pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let dir = &config.out;
    let manifests = completed(dir)?;
    let has = |kind: CommandKind| manifests.iter().any(|m| m.command == kind.name());
    let mut figures = Vec::new();
    let mut outputs = vec![REPORT_FILE.to_string()];

    let mut baseline_section = None;
    if has(CommandKind::Baseline) {
        let b = BaselineReport::load(dir)?;
        write_atomic(&dir.join(FIGURE_FILE), figure(&b)?.as_bytes())?;
        figures.push(FIGURE_FILE.to_string());
        outputs.push(FIGURE_FILE.into());
        baseline_section = Some(BaselineSection {
            pitchers: b.pitchers,
            best: b.best,
            cross_r2: b.cross_r2,
            cross_r2_sd: b.cross_r2_sd,
            within: b.within,
            rows: b.rows,
        });
    }
    let analysis1 = if has(CommandKind::Analyze1) {
        figures.push(analyze1::FIGURE_FILE.into());
        Some(read_json::<Analysis1Report>(&dir.join(analyze1::REPORT_FILE))?)
    } else {
        None
    };
    let analysis2 = if has(CommandKind::Analyze2) {
        figures.push(analyze2::FIGURE_FILE.into());
        let a: Analysis2Report = read_json(&dir.join(analyze2::REPORT_FILE))?;
        Some(Analysis2Section {
            spec: a.spec,
            repeats: a.repeats,
            trainings: a.trainings,
            summary: a.summary,
            control_summary: a.control_summary,
            baseline: a.baseline,
        })
    } else {
        None
    };

    let report = Report {
        schema: REPORT_SCHEMA.into(),
        commands: manifests
            .into_iter()
            .map(|m| CommandEntry {
                command: m.command,
                seed: m.seed,
                outputs: m.outputs,
            })
            .collect(),
        baseline: baseline_section,
        analysis1,
        analysis2,
        figures,
    };
    write_json(&dir.join(REPORT_FILE), &report)?;
    Ok(outputs)
}
