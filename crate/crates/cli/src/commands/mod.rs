//! The six pipeline commands. Each computes all results in memory, then
//! writes them atomically under the output directory.

pub mod analyze1;
pub mod analyze2;
pub mod baseline;
pub mod prep;
pub mod report;
pub mod synth;

use std::fs;
use std::time::Instant;

use crossind_core::dataset::{load_corpus_collecting, synthesize_corpus, Corpus, LoadOptions};
use crossind_core::harness::EvalConfig;

use crate::config::{CorpusSource, RunConfig};
use crate::error::{describe, runtime, CliError};
use crate::output::{RunManifest, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Synth,
    Prep,
    Baseline,
    Analyze1,
    Analyze2,
    Report,
}

impl CommandKind {
    pub const ALL: [CommandKind; 6] = [
        CommandKind::Synth,
        CommandKind::Prep,
        CommandKind::Baseline,
        CommandKind::Analyze1,
        CommandKind::Analyze2,
        CommandKind::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Synth => "synth",
            CommandKind::Prep => "prep",
            CommandKind::Baseline => "baseline",
            CommandKind::Analyze1 => "analyze1",
            CommandKind::Analyze2 => "analyze2",
            CommandKind::Report => "report",
        }
    }
}

/// Runs one command between a running manifest and a final one.
/// Returns the artifacts written, relative to `config.out`.
pub fn execute(kind: CommandKind, config: &RunConfig) -> Result<Vec<String>, CliError> {
    let out = &config.out;
    fs::create_dir_all(out).map_err(|e| runtime(out.display(), e))?;
    let mut manifest = RunManifest::start(kind.name(), config);
    manifest.write(out)?;
    let running = out.join(RunManifest::file_name(kind.name(), &RunStatus::Running));

    let started = Instant::now();
    let result = match kind {
        CommandKind::Synth => synth::run(config),
        CommandKind::Prep => prep::run(config),
        CommandKind::Baseline => baseline::run(config),
        CommandKind::Analyze1 => analyze1::run(config),
        CommandKind::Analyze2 => analyze2::run(config),
        CommandKind::Report => report::run(config),
    };
    manifest.wall_time_s = Some(started.elapsed().as_secs_f64());
    match &result {
        Ok(outputs) => {
            manifest.status = RunStatus::Complete;
            manifest.outputs = outputs.clone();
            let stale = out.join(RunManifest::file_name(kind.name(), &RunStatus::Failed));
            if stale.exists() {
                fs::remove_file(&stale).map_err(|e| runtime(stale.display(), e))?;
            }
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
        }
    }
    manifest.write(out)?;
    fs::remove_file(&running).map_err(|e| runtime(running.display(), e))?;
    result
}

/// The corpus named by the configuration; synthetic corpora are rebuilt
/// from the seed.
pub fn corpus(config: &RunConfig) -> Result<Corpus, CliError> {
    let corpus = match &config.corpus {
        CorpusSource::Synthetic => synthesize_corpus(&config.synth, config.seed)?.corpus()?,
        CorpusSource::Manifest(path) => {
            load_corpus_collecting(path, &LoadOptions::default())
                .map_err(|errors| load_failure(path, &errors))?
                .corpus
        }
    };
    match config.pitchers {
        Some(n) if n > corpus.len() => Err(CliError::Runtime(format!(
            "`pitchers = {n}` but the corpus has {} pitchers",
            corpus.len()
        ))),
        Some(n) if n < corpus.len() => Ok(corpus.truncated(n)),
        _ => Ok(corpus),
    }
}

pub fn load_failure(path: &std::path::Path, errors: &[crossind_core::Error]) -> CliError {
    let lines: Vec<String> = errors.iter().map(|e| format!("  {}", describe(e))).collect();
    CliError::Runtime(format!(
        "{}: {} error(s) while loading the corpus:\n{}",
        path.display(),
        errors.len(),
        lines.join("\n")
    ))
}

pub fn eval_config(config: &RunConfig) -> EvalConfig {
    EvalConfig {
        train: config.train.clone(),
        workers: config.workers,
        ..EvalConfig::default()
    }
}
