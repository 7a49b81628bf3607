//! `prep`: preprocesses a corpus into normalized pitches and a log.

use std::path::PathBuf;

use crossind_core::dataset::{load_corpus_collecting, write_corpus, LoadOptions};

use super::load_failure;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{opt_num, replace_dir, CsvOut};

pub const PREPPED_DIR: &str = "prepped";
pub const LOG_FILE: &str = "prep_log.csv";
pub const LOG_SCHEMA: &str = "prep-log-v1";

/// A directory means its `manifest.json`.
pub fn manifest_path(input: &std::path::Path) -> PathBuf {
    if input.is_dir() {
        input.join("manifest.json")
    } else {
        input.to_path_buf()
    }
}

pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| CliError::Validation("prep needs `--input` (corpus directory or manifest)".into()))?;
    let manifest = manifest_path(input);
    // everything is read before the destination is touched, so the input
    // may be a previous output
    let report = load_corpus_collecting(&manifest, &LoadOptions::default())
        .map_err(|errors| load_failure(&manifest, &errors))?;
    log::info!("prep: {} pitchers from {}", report.corpus.len(), manifest.display());

    let mut log = CsvOut::new(&[
        "schema",
        "pitcher",
        "file",
        "kind",
        "cutoff_hz",
        "release_frame",
        "mirrored",
    ]);
    for e in &report.log {
        log.row([
            LOG_SCHEMA.to_string(),
            e.pitcher.clone(),
            e.file.clone(),
            serde_json::to_value(e.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            opt_num(e.cutoff_hz),
            e.release_frame.map(|f| f.to_string()).unwrap_or_default(),
            e.mirrored.to_string(),
        ]);
    }
    replace_dir(&config.out.join(PREPPED_DIR), |tmp| {
        write_corpus(tmp, &report.corpus).map(|_| ()).map_err(CliError::from)
    })?;
    log.finish(&config.out.join(LOG_FILE))?;
    Ok(vec![format!("{PREPPED_DIR}/manifest.json"), LOG_FILE.into()])
}
