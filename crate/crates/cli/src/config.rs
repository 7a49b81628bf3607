//! Run configuration: flat `key = value` files plus command-line overrides.
//!
//! Precedence, lowest first: built-in defaults, `CROSSIND_OUT` for `out`, the
//! `--config` file, `--set` pairs, then dedicated flags. A run manifest can be
//! passed as `--config`; its `config` object is read back as the key set.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crossind_core::dataset::SynthConfig;
use crossind_core::harness::{InputStandardization, TrainConfig};
use crossind_core::models::ModelSpec;

use crate::error::CliError;

pub const OUT_ENV: &str = "CROSSIND_OUT";
pub const DEFAULT_OUT: &str = "crossind-out";
/// Synthetic corpus size when `pitchers = auto`.
pub const DESK_PITCHERS: usize = 10;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("corpus", "`synthetic` or the path of a corpus manifest.json"),
    ("pitchers", "`auto` (10 synthetic, all real) or a count"),
    ("seed", "base seed for corpus generation and training"),
    ("workers", "worker threads"),
    ("repeats", "independent training repeats per configuration"),
    ("grid", "`;`-separated model specs, or `all` for the twelve candidates"),
    ("out", "output directory"),
    ("input", "corpus directory or manifest for `prep`"),
    ("synth.format", "`normalized` or `raw` pitches written by `synth`"),
    (
        "synth.pitches_per_pitcher",
        "generated pitches per pitcher (five fastest kept)",
    ),
    ("synth.left_fraction", "share of left-handed pitchers"),
    (
        "synth.intermediate_offset_mean",
        "mean hidden speed offset of the intermediate levels, mph",
    ),
    (
        "synth.expert_offset_mean",
        "mean hidden speed offset of the other levels, mph",
    ),
    ("synth.offset_sd", "per-pitcher SD of the hidden offset, mph"),
    ("synth.speed_noise_sd", "per-pitch speed noise, mph"),
    ("synth.pitch_jitter", "relative pitch-to-pitch kinematic variation"),
    ("synth.position_noise", "marker noise SD, m"),
    ("synth.sampling_rate", "raw capture rate, Hz"),
    ("train.learning_rate", "Adam learning rate"),
    ("train.weight_decay", "L2 weight decay"),
    ("train.max_epochs", "epoch cap"),
    ("train.early_stop_r2", "stop once training R² exceeds this"),
    ("train.batch_size", "mini-batch size"),
    ("train.input_standardization", "`per_channel` or `none`"),
    ("train.standardize_target", "`true` or `false`"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusSource {
    Synthetic,
    Manifest(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Resolved key set, echoed verbatim into run manifests.
    pub entries: BTreeMap<String, String>,
    pub corpus: CorpusSource,
    pub pitchers: Option<usize>,
    pub synth: SynthConfig,
    pub synth_raw: bool,
    pub input: Option<PathBuf>,
    pub train: TrainConfig,
    pub grid: Vec<ModelSpec>,
    pub repeats: usize,
    pub workers: usize,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn defaults() -> BTreeMap<String, String> {
    let s = SynthConfig::default();
    let t = TrainConfig::default();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = std::env::var(OUT_ENV)
        .ok()
        .filter(|v| !v.is_empty())
        .unwrap_or_else(|| DEFAULT_OUT.into());
    let pairs: [(&str, String); 25] = [
        ("corpus", "synthetic".into()),
        ("pitchers", "auto".into()),
        ("seed", "0".into()),
        ("workers", workers.to_string()),
        ("repeats", "2".into()),
        ("grid", "transformer:2,32,64".into()),
        ("out", out),
        ("input", String::new()),
        ("synth.format", "normalized".into()),
        ("synth.pitches_per_pitcher", s.pitches_per_pitcher.to_string()),
        ("synth.left_fraction", s.left_fraction.to_string()),
        ("synth.intermediate_offset_mean", s.intermediate_offset_mean.to_string()),
        ("synth.expert_offset_mean", s.expert_offset_mean.to_string()),
        ("synth.offset_sd", s.offset_sd.to_string()),
        ("synth.speed_noise_sd", s.speed_noise_sd.to_string()),
        ("synth.pitch_jitter", s.pitch_jitter.to_string()),
        ("synth.position_noise", s.position_noise.to_string()),
        ("synth.sampling_rate", s.sampling_rate.to_string()),
        ("train.learning_rate", t.learning_rate.to_string()),
        ("train.weight_decay", t.weight_decay.to_string()),
        ("train.max_epochs", t.max_epochs.to_string()),
        ("train.early_stop_r2", t.early_stop_r2.to_string()),
        ("train.batch_size", t.batch_size.to_string()),
        ("train.input_standardization", "per_channel".into()),
        ("train.standardize_target", t.standardize_target.to_string()),
    ];
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Validation(message.into())
}

/// Parses `key = value` lines. `#` starts a comment line.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("{origin}:{}: expected `key = value`, got `{line}`", i + 1)))?;
        let k = k.trim().to_string();
        if pairs.iter().any(|(p, _)| *p == k) {
            return Err(invalid(format!("{origin}:{}: duplicate key `{k}`", i + 1)));
        }
        pairs.push((k, v.trim().to_string()));
    }
    Ok(pairs)
}

fn json_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| invalid(format!("{origin}: {e}")))?;
    let object = value.get("config").unwrap_or(&value);
    let map = object
        .as_object()
        .ok_or_else(|| invalid(format!("{origin}: expected a JSON object of settings")))?;
    map.iter()
        .map(|(k, v)| {
            let v = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(_) | serde_json::Value::Bool(_) => v.to_string(),
                _ => return Err(invalid(format!("{origin}: `{k}` must be a string, number or boolean"))),
            };
            Ok((k.clone(), v))
        })
        .collect()
}

/// Reads a config file: `key = value` text, or JSON (a run manifest or a
/// flat object).
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    if text.trim_start().starts_with('{') {
        json_pairs(&text, &origin)
    } else {
        parse_pairs(&text, &origin)
    }
}

/// Applies override layers in order and validates the result.
pub fn resolve(layers: &[Vec<(String, String)>]) -> Result<RunConfig, CliError> {
    let mut entries = defaults();
    for layer in layers {
        for (k, v) in layer {
            match entries.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => {
                    return Err(invalid(format!(
                        "unknown configuration key `{k}`; accepted keys: {}",
                        KEYS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", ")
                    )))
                }
            }
        }
    }
    build(entries)
}

fn get<'a>(entries: &'a BTreeMap<String, String>, key: &str) -> &'a str {
    entries.get(key).map(String::as_str).unwrap_or_default()
}

fn number<T: std::str::FromStr>(entries: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    let v = get(entries, key);
    v.parse()
        .map_err(|_| invalid(format!("`{key}`: cannot parse `{v}` as a number")))
}

fn boolean(entries: &BTreeMap<String, String>, key: &str) -> Result<bool, CliError> {
    match get(entries, key) {
        "true" => Ok(true),
        "false" => Ok(false),
        v => Err(invalid(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn build(entries: BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let corpus = match get(&entries, "corpus") {
        "synthetic" => CorpusSource::Synthetic,
        "" => return Err(invalid("`corpus` is empty")),
        path => CorpusSource::Manifest(PathBuf::from(path)),
    };
    let pitchers = match get(&entries, "pitchers") {
        "auto" => None,
        _ => Some(number::<usize>(&entries, "pitchers")?),
    };
    if pitchers.is_some_and(|n| n < 2) {
        return Err(invalid("`pitchers` must be at least 2"));
    }
    let seed: u64 = number(&entries, "seed")?;
    let workers: usize = number(&entries, "workers")?;
    let repeats: usize = number(&entries, "repeats")?;
    if workers == 0 {
        return Err(invalid("`workers` must be at least 1"));
    }
    if repeats == 0 {
        return Err(invalid("`repeats` must be at least 1"));
    }
    let grid = ModelSpec::parse_grid(get(&entries, "grid")).map_err(|e| invalid(format!("`grid`: {e}")))?;
    if grid.is_empty() {
        return Err(invalid("`grid` names no model"));
    }
    let out = match get(&entries, "out") {
        "" => return Err(invalid("`out` is empty")),
        p => PathBuf::from(p),
    };
    let input = Some(get(&entries, "input"))
        .filter(|s| !s.is_empty())
        .map(PathBuf::from);
    let synth_raw = match get(&entries, "synth.format") {
        "normalized" => false,
        "raw" => true,
        v => {
            return Err(invalid(format!(
                "`synth.format`: expected normalized or raw, got `{v}`"
            )))
        }
    };

    let synth = SynthConfig {
        n_pitchers: pitchers.unwrap_or(DESK_PITCHERS),
        pitches_per_pitcher: number(&entries, "synth.pitches_per_pitcher")?,
        left_fraction: number(&entries, "synth.left_fraction")?,
        intermediate_offset_mean: number(&entries, "synth.intermediate_offset_mean")?,
        expert_offset_mean: number(&entries, "synth.expert_offset_mean")?,
        offset_sd: number(&entries, "synth.offset_sd")?,
        speed_noise_sd: number(&entries, "synth.speed_noise_sd")?,
        pitch_jitter: number(&entries, "synth.pitch_jitter")?,
        position_noise: number(&entries, "synth.position_noise")?,
        sampling_rate: number(&entries, "synth.sampling_rate")?,
        ..SynthConfig::default()
    };
    synth.validate().map_err(|e| invalid(e.to_string()))?;

    let train = TrainConfig {
        learning_rate: number(&entries, "train.learning_rate")?,
        weight_decay: number(&entries, "train.weight_decay")?,
        max_epochs: number(&entries, "train.max_epochs")?,
        early_stop_r2: number(&entries, "train.early_stop_r2")?,
        batch_size: number(&entries, "train.batch_size")?,
        seed,
        input_standardization: match get(&entries, "train.input_standardization") {
            "per_channel" => InputStandardization::PerChannel,
            "none" => InputStandardization::None,
            v => {
                return Err(invalid(format!(
                    "`train.input_standardization`: expected per_channel or none, got `{v}`"
                )))
            }
        },
        standardize_target: boolean(&entries, "train.standardize_target")?,
    };
    train.validate().map_err(|e| invalid(e.to_string()))?;

    Ok(RunConfig {
        entries,
        corpus,
        pitchers,
        synth,
        synth_raw,
        input,
        train,
        grid,
        repeats,
        workers,
        seed,
        out,
    })
}

/// The format reference written by `crossind config`.
pub fn describe() -> String {
    let defaults = defaults();
    let mut text = String::from("# crossind configuration: one `key = value` per line; `#` starts a comment.\n");
    for (key, help) in KEYS {
        text.push_str(&format!("\n# {help}\n{key} = {}\n", defaults[*key]));
    }
    text
}
