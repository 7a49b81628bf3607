//! Atomic artifact writes and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{runtime, CliError};

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| runtime(dir.display(), e))?;
    }
    let tmp = tmp_sibling(path);
    fs::write(&tmp, bytes).map_err(|e| runtime(tmp.display(), e))?;
    fs::rename(&tmp, path).map_err(|e| runtime(path.display(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| runtime(path.display(), e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| runtime(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| runtime(path.display(), e))
}

fn tmp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Fills a fresh directory through `fill`, then swaps it in place of `dest`.
pub fn replace_dir(dest: &Path, fill: impl FnOnce(&Path) -> Result<(), CliError>) -> Result<(), CliError> {
    let tmp = tmp_sibling(dest);
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| runtime(tmp.display(), e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| runtime(tmp.display(), e))?;
    if let Err(e) = fill(&tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    let mut old_name = dest.file_name().unwrap_or_default().to_os_string();
    old_name.push(".old");
    let old = dest.with_file_name(old_name);
    if dest.exists() {
        if old.exists() {
            fs::remove_dir_all(&old).map_err(|e| runtime(old.display(), e))?;
        }
        fs::rename(dest, &old).map_err(|e| runtime(dest.display(), e))?;
    }
    fs::rename(&tmp, dest).map_err(|e| runtime(dest.display(), e))?;
    if old.exists() {
        fs::remove_dir_all(&old).map_err(|e| runtime(old.display(), e))?;
    }
    Ok(())
}

/// Buffers CSV rows in memory; `finish` writes the file atomically.
pub struct CsvOut {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvOut {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self, path: &Path) -> Result<(), CliError> {
        let bytes = self.writer.into_inner().map_err(|e| runtime(path.display(), e))?;
        write_atomic(path, &bytes)
    }
}

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    v.to_string()
}

/// Empty for `None`.
pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

/// Written before a command produces results, and again when it ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub status: RunStatus,
    pub version: String,
    pub schemas: BTreeMap<String, String>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub wall_time_s: Option<f64>,
    /// Artifact paths relative to the output directory.
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

pub const CRATE_VERSION: &str = env!("CARGO_PKG_VERSION");

impl RunManifest {
    pub fn start(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            status: RunStatus::Running,
            version: CRATE_VERSION.into(),
            schemas: crate::schemas(),
            seed: config.seed,
            config: config.entries.clone(),
            wall_time_s: None,
            outputs: Vec::new(),
            error: None,
        }
    }

    /// `manifest_<cmd>.json` once complete; in-flight and failed runs use
    /// their own names so they never replace a complete manifest.
    pub fn file_name(command: &str, status: &RunStatus) -> String {
        match status {
            RunStatus::Complete => format!("manifest_{command}.json"),
            RunStatus::Running => format!("manifest_{command}.running.json"),
            RunStatus::Failed => format!("manifest_{command}.failed.json"),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_json(&dir.join(Self::file_name(&self.command, &self.status)), self)
    }
}
