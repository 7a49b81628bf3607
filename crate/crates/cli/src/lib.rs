//! The `crossind` command line: corpus generation and preprocessing, baseline
//! selection, the two analyses, and a consolidated report.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{analyze1, analyze2, baseline, prep, report, synth, CommandKind};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "crossind",
    version,
    about = "Cross-individual ball-speed prediction from pitching motion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// `key = value` file, or a run manifest to reproduce.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override any configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true)]
    pub repeats: Option<usize>,

    /// `;`-separated specs such as `transformer:2,32,64`, or `all`.
    #[arg(long, global = true)]
    pub grid: Option<String>,

    /// Output directory [env: CROSSIND_OUT].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// `auto` or a count.
    #[arg(long, global = true)]
    pub pitchers: Option<String>,

    /// `synthetic` or a corpus manifest.
    #[arg(long, global = true)]
    pub corpus: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic corpus and its planted truth.
    Synth {
        /// Write raw captures instead of normalized pitches.
        #[arg(long)]
        raw: bool,
    },
    /// Preprocess a corpus into normalized pitches.
    Prep {
        /// Corpus directory or manifest.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Select the baseline model and compare cross- and within-individual R².
    Baseline,
    /// Group pitchers by expertise and test the prediction errors.
    Analyze1,
    /// Region by time-window ablation of the baseline model.
    Analyze2,
    /// Consolidate completed outputs in the run directory.
    Report,
    /// Print every configuration key with its default.
    Config,
}

/// Schema version of every versioned artifact, by file name.
pub fn schemas() -> BTreeMap<String, String> {
    [
        (synth::TRUTH_FILE, synth::TRUTH_SCHEMA.to_string()),
        (prep::LOG_FILE, prep::LOG_SCHEMA.to_string()),
        (baseline::TABLE_FILE, baseline::TABLE_SCHEMA.to_string()),
        (baseline::REPORT_FILE, baseline::TABLE_SCHEMA.to_string()),
        (
            baseline::RESULTS_FILE,
            crossind_core::harness::RESULTS_SCHEMA.to_string(),
        ),
        (analyze1::GROUPING_FILE, analyze1::GROUPING_SCHEMA.to_string()),
        (analyze1::ERRORS_FILE, analyze1::ERRORS_SCHEMA.to_string()),
        (analyze1::TABLE_FILE, analyze1::TABLE_SCHEMA.to_string()),
        (analyze1::REPORT_FILE, analyze1::TABLE_SCHEMA.to_string()),
        (analyze2::TABLE_FILE, analyze2::TABLE_SCHEMA.to_string()),
        (analyze2::CELLS_FILE, analyze2::CELLS_SCHEMA.to_string()),
        (analyze2::REPORT_FILE, analyze2::TABLE_SCHEMA.to_string()),
        (report::REPORT_FILE, report::REPORT_SCHEMA.to_string()),
        (
            "manifest.json",
            format!(
                "{}-v{}",
                crossind_core::dataset::MANIFEST_FORMAT,
                crossind_core::dataset::MANIFEST_VERSION
            ),
        ),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn set_pair(text: &str) -> Result<(String, String), CliError> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Validation(format!("--set expects KEY=VALUE, got `{text}`"))),
    }
}

impl Cli {
    /// Configuration layers above the defaults, lowest first.
    fn layers(&self) -> Result<Vec<Vec<(String, String)>>, CliError> {
        let mut layers = Vec::new();
        if let Some(path) = &self.config {
            layers.push(config::read_config_file(path)?);
        }
        layers.push(self.set.iter().map(|s| set_pair(s)).collect::<Result<_, _>>()?);

        let mut flags: Vec<(String, String)> = Vec::new();
        let mut flag = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                flags.push((key.to_string(), v));
            }
        };
        flag("seed", self.seed.map(|v| v.to_string()));
        flag("workers", self.workers.map(|v| v.to_string()));
        flag("repeats", self.repeats.map(|v| v.to_string()));
        flag("grid", self.grid.clone());
        flag("out", self.out.as_ref().map(|p| p.display().to_string()));
        flag("pitchers", self.pitchers.clone());
        flag("corpus", self.corpus.clone());
        match &self.command {
            Command::Synth { raw: true } => flag("synth.format", Some("raw".into())),
            Command::Prep { input } => flag("input", input.as_ref().map(|p| p.display().to_string())),
            _ => {}
        }
        layers.push(flags);
        Ok(layers)
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// artifacts written.
pub fn run<I, T>(args: I) -> Result<Vec<String>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(Vec::new());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text);
            return Err(CliError::Validation(text.trim_end().to_string()));
        }
    };
    let config = config::resolve(&cli.layers()?)?;
    let kind = match cli.command {
        Command::Config => {
            print!("{}", config::describe());
            return Ok(Vec::new());
        }
        Command::Synth { .. } => CommandKind::Synth,
        Command::Prep { .. } => CommandKind::Prep,
        Command::Baseline => CommandKind::Baseline,
        Command::Analyze1 => CommandKind::Analyze1,
        Command::Analyze2 => CommandKind::Analyze2,
        Command::Report => CommandKind::Report,
    };
    if kind == CommandKind::Prep && config.input.is_none() {
        return Err(CliError::Validation(
            "prep needs `--input` (corpus directory or manifest)".into(),
        ));
    }
    let outputs = commands::execute(kind, &config)?;
    Ok(outputs
        .into_iter()
        .map(|o| config.out.join(o).display().to_string())
        .collect())
}

/// [`run`] with errors printed; returns the process exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(args) {
        Ok(outputs) => {
            for o in outputs {
                println!("{o}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("crossind").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_set_pairs() {
        let cli = parse(&["baseline", "--set", "seed=3", "--seed", "9", "--set", "repeats=4"]);
        let config = config::resolve(&cli.layers().unwrap()).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.repeats, 4);
    }

    #[test]
    fn synth_raw_sets_the_format() {
        let config = config::resolve(&parse(&["synth", "--raw"]).layers().unwrap()).unwrap();
        assert!(config.synth_raw);
    }

    #[test]
    fn malformed_set_is_a_validation_error() {
        let err = parse(&["baseline", "--set", "seed"]).layers().unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn every_artifact_has_a_schema() {
        let schemas = schemas();
        assert!(schemas.values().all(|v| !v.is_empty()));
        assert!(schemas.contains_key(report::REPORT_FILE));
    }
}
