//! Corpus files: a JSON manifest plus one CSV per pitch.
//!
//! Pitch CSV: a mandatory header `frame,head_x,head_y,head_z,l_shoulder_x,…`
//! (45 coordinate columns, joint-major in [`JointId`] order), then one row per
//! frame with `frame` counting up from 0. Values are written in shortest
//! round-trip decimal form, so write → load reproduces every bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synth::SyntheticCorpus;
use super::types::{select_top5, Corpus, MotionSample, PitcherRecord, PITCHES_PER_PITCHER, SPEED_BAND_MPH};
use crate::error::{Error, Result};
use crate::joints::{CompetitiveLevel, Handedness, JointId, JOINT_COUNT};
use crate::signal::{mirror_poses, preprocess, NormalizedMotion, Pose, PrepConfig, RawMotion};

pub const MANIFEST_FORMAT: &str = "crossind-corpus";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PitchKind {
    /// Unfiltered capture at `sampling_rate`; preprocessed on load.
    Raw,
    /// Already 101 frames, right-handed frame.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchEntry {
    /// Path relative to the manifest directory.
    pub file: String,
    pub ball_speed: f64,
    pub kind: PitchKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_rate: Option<f64>,
    #[serde(default)]
    pub mirrored: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitcherEntry {
    pub id: String,
    pub level: CompetitiveLevel,
    pub handedness: Handedness,
    pub pitches: Vec<PitchEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub pitchers: Vec<PitcherEntry>,
}

impl Manifest {
    pub fn new(pitchers: Vec<PitcherEntry>) -> Self {
        Self {
            format: MANIFEST_FORMAT.to_string(),
            version: MANIFEST_VERSION,
            pitchers,
        }
    }
}

/// Source coordinate conventions, applied to raw captures only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Output axis `k` is taken from source axis `axis_map[k]`.
    pub axis_map: [usize; 3],
    pub axis_sign: [f64; 3],
    /// Multiplier converting source units to meters.
    pub unit_scale: f64,
    pub prep: PrepConfig,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            axis_map: [0, 1, 2],
            axis_sign: [1.0; 3],
            unit_scale: 1.0,
            prep: PrepConfig::default(),
        }
    }
}

impl LoadOptions {
    fn validate(&self) -> Result<()> {
        let mut seen = [false; 3];
        for &a in &self.axis_map {
            if a > 2 || seen[a] {
                return Err(Error::InvalidConfig(format!(
                    "axis map {:?} is not a permutation",
                    self.axis_map
                )));
            }
            seen[a] = true;
        }
        if !(self.unit_scale > 0.0 && self.unit_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("unit scale {}", self.unit_scale)));
        }
        Ok(())
    }

    fn transform(&self, frames: &mut [Pose]) {
        for pose in frames {
            for p in pose.iter_mut() {
                let src = *p;
                for k in 0..3 {
                    p[k] = src[self.axis_map[k]] * self.axis_sign[k] * self.unit_scale;
                }
            }
        }
    }
}

/// What preprocessing did to one pitch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepLogEntry {
    pub pitcher: String,
    pub file: String,
    pub kind: PitchKind,
    pub cutoff_hz: Option<f64>,
    pub release_frame: Option<usize>,
    pub mirrored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub log: Vec<PrepLogEntry>,
}

pub fn csv_header() -> Vec<String> {
    let mut h = vec!["frame".to_string()];
    for j in JointId::ALL {
        for axis in ["x", "y", "z"] {
            h.push(format!("{}_{axis}", j.label()));
        }
    }
    h
}

fn format_err(path: &Path, line: usize, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        field: field.into(),
        message: message.into(),
    }
}

pub fn read_pitch_csv(path: &Path) -> Result<Vec<Pose>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let expected = csv_header();
    let header = reader
        .headers()
        .map_err(|e| format_err(path, 1, "header", e.to_string()))?;
    if header.len() != expected.len() {
        return Err(format_err(
            path,
            1,
            "header",
            format!("{} columns, expected {}", header.len(), expected.len()),
        ));
    }
    for (got, want) in header.iter().zip(&expected) {
        if got.trim() != want {
            return Err(format_err(path, 1, want.as_str(), format!("header column `{got}`")));
        }
    }

    let mut frames = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| format_err(path, line, "row", e.to_string()))?;
        if record.len() != expected.len() {
            return Err(format_err(
                path,
                line,
                "row",
                format!("{} fields, expected {}", record.len(), expected.len()),
            ));
        }
        let frame: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| format_err(path, line, "frame", format!("`{}` is not a frame index", &record[0])))?;
        if frame != row {
            return Err(format_err(
                path,
                line,
                "frame",
                format!("expected frame {row}, found {frame}"),
            ));
        }
        let mut pose = [[0.0; 3]; JOINT_COUNT];
        for (c, value) in record.iter().enumerate().skip(1) {
            let v: f64 = value
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    format_err(
                        path,
                        line,
                        expected[c].as_str(),
                        format!("`{value}` is not a finite number"),
                    )
                })?;
            pose[(c - 1) / 3][(c - 1) % 3] = v;
        }
        frames.push(pose);
    }
    if frames.is_empty() {
        return Err(format_err(path, 2, "row", "no frames"));
    }
    Ok(frames)
}

pub fn write_pitch_csv(path: &Path, frames: &[Pose]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut out = String::with_capacity(frames.len() * 45 * 12);
    out.push_str(&csv_header().join(","));
    out.push('\n');
    for (i, pose) in frames.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in pose.iter().flatten() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| format_err(path, e.line(), "manifest", e.to_string()))?;
    if manifest.format != MANIFEST_FORMAT || manifest.version != MANIFEST_VERSION {
        return Err(format_err(
            path,
            1,
            "format",
            format!(
                "`{}` version {}; expected `{MANIFEST_FORMAT}` version {MANIFEST_VERSION}",
                manifest.format, manifest.version
            ),
        ));
    }
    Ok(manifest)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

fn load_pitch(
    base: &Path,
    manifest_path: &Path,
    pitcher: &PitcherEntry,
    field: &str,
    entry: &PitchEntry,
    options: &LoadOptions,
) -> Result<(MotionSample, PrepLogEntry)> {
    let path = base.join(&entry.file);
    let mut frames = read_pitch_csv(&path)?;
    let (motion, cutoff_hz, release_frame) = match entry.kind {
        PitchKind::Raw => {
            let fs_hz = entry.sampling_rate.ok_or_else(|| {
                format_err(
                    manifest_path,
                    0,
                    format!("{field}.sampling_rate"),
                    "required for raw pitches",
                )
            })?;
            options.transform(&mut frames);
            let raw = RawMotion::new(frames, fs_hz, pitcher.handedness)?;
            let out = preprocess(&raw, &options.prep)?;
            (out.motion, Some(out.cutoff_hz), Some(out.release_frame))
        }
        PitchKind::Normalized => {
            let fraction = entry.release_fraction.ok_or_else(|| {
                format_err(
                    manifest_path,
                    0,
                    format!("{field}.release_fraction"),
                    "required for normalized pitches",
                )
            })?;
            let mirrored = match (pitcher.handedness, entry.mirrored) {
                (Handedness::Right, true) => {
                    return Err(format_err(
                        manifest_path,
                        0,
                        format!("{field}.mirrored"),
                        "right-handed pitch flagged as mirrored",
                    ))
                }
                (Handedness::Left, false) => {
                    mirror_poses(&mut frames, options.prep.lateral_axis);
                    true
                }
                (_, m) => m,
            };
            (NormalizedMotion::new(frames, fraction, mirrored)?, None, None)
        }
    };
    let log = PrepLogEntry {
        pitcher: pitcher.id.clone(),
        file: entry.file.clone(),
        kind: entry.kind,
        cutoff_hz,
        release_frame,
        mirrored: motion.mirrored,
    };
    Ok((MotionSample::new(motion, entry.ball_speed, pitcher.id.clone())?, log))
}

/// Loads and preprocesses every pitcher in the manifest, keeping the five
/// fastest pitches of each (selected before preprocessing).
pub fn load_corpus(manifest_path: &Path, options: &LoadOptions) -> Result<LoadReport> {
    load_corpus_collecting(manifest_path, options).map_err(|mut errors| errors.swap_remove(0))
}

/// Like [`load_corpus`], but keeps going past failing pitches and returns
/// every per-pitch error (never an empty list).
pub fn load_corpus_collecting(
    manifest_path: &Path,
    options: &LoadOptions,
) -> std::result::Result<LoadReport, Vec<Error>> {
    options.validate().map_err(|e| vec![e])?;
    let manifest = read_manifest(manifest_path).map_err(|e| vec![e])?;
    check_manifest(manifest_path, &manifest).map_err(|e| vec![e])?;

    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut records = Vec::with_capacity(manifest.pitchers.len());
    let mut log = Vec::new();
    let mut errors = Vec::new();
    for (i, pitcher) in manifest.pitchers.iter().enumerate() {
        let indexed: Vec<(usize, &PitchEntry)> = pitcher.pitches.iter().enumerate().collect();
        let chosen = select_top5(indexed, |(_, e)| e.ball_speed).map_err(|e| vec![e])?;
        let mut pitches = Vec::with_capacity(PITCHES_PER_PITCHER);
        for (j, entry) in chosen {
            let field = format!("pitchers[{i}].pitches[{j}]");
            match load_pitch(base, manifest_path, pitcher, &field, entry, options) {
                Ok((sample, entry_log)) => {
                    pitches.push(sample);
                    log.push(entry_log);
                }
                Err(e @ (Error::Format { .. } | Error::Io { .. })) => errors.push(e),
                Err(e) => errors.push(Error::Pitch {
                    file: base.join(&entry.file),
                    source: Box::new(e),
                }),
            }
        }
        records.push(PitcherRecord {
            id: pitcher.id.clone(),
            level: pitcher.level,
            handedness: pitcher.handedness,
            pitches,
        });
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(LoadReport {
        corpus: Corpus::new(records).map_err(|e| vec![e])?,
        log,
    })
}

fn check_manifest(manifest_path: &Path, manifest: &Manifest) -> Result<()> {
    if manifest.pitchers.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let short: Vec<String> = manifest
        .pitchers
        .iter()
        .filter(|p| p.pitches.len() < PITCHES_PER_PITCHER)
        .map(|p| p.id.clone())
        .collect();
    if !short.is_empty() {
        return Err(Error::TooFewPitches {
            required: PITCHES_PER_PITCHER,
            pitchers: short,
        });
    }
    let (lo, hi) = SPEED_BAND_MPH;
    for (i, p) in manifest.pitchers.iter().enumerate() {
        for (j, e) in p.pitches.iter().enumerate() {
            if !(e.ball_speed > lo && e.ball_speed < hi) {
                return Err(format_err(
                    manifest_path,
                    0,
                    format!("pitchers[{i}].pitches[{j}].ball_speed"),
                    format!("{} mph outside ({lo}, {hi})", e.ball_speed),
                ));
            }
        }
    }
    Ok(())
}

fn pitch_file(id: &str, k: usize) -> String {
    format!("{id}/pitch_{:02}.csv", k + 1)
}

/// Writes a normalized corpus to `dir/manifest.json` and per-pitch CSVs.
pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<PathBuf> {
    let mut entries = Vec::with_capacity(corpus.len());
    for p in &corpus.pitchers {
        let mut pitches = Vec::with_capacity(p.pitches.len());
        for (k, s) in p.pitches.iter().enumerate() {
            let file = pitch_file(&p.id, k);
            write_pitch_csv(&dir.join(&file), s.motion.frames())?;
            pitches.push(PitchEntry {
                file,
                ball_speed: s.ball_speed,
                kind: PitchKind::Normalized,
                sampling_rate: None,
                mirrored: s.motion.mirrored,
                release_fraction: Some(s.motion.release_fraction),
            });
        }
        entries.push(PitcherEntry {
            id: p.id.clone(),
            level: p.level,
            handedness: p.handedness,
            pitches,
        });
    }
    let path = dir.join("manifest.json");
    write_manifest(&path, &Manifest::new(entries))?;
    Ok(path)
}

impl SyntheticCorpus {
    /// Writes every generated pitch as a raw capture, before selection.
    pub fn write_raw(&self, dir: &Path) -> Result<PathBuf> {
        let mut entries = Vec::with_capacity(self.pitchers.len());
        for p in &self.pitchers {
            let mut pitches = Vec::with_capacity(p.pitches.len());
            for (k, s) in p.pitches.iter().enumerate() {
                let file = pitch_file(&p.id, k);
                let capture = p.render(k, &self.config)?;
                write_pitch_csv(&dir.join(&file), &capture.raw.frames)?;
                pitches.push(PitchEntry {
                    file,
                    ball_speed: s.ball_speed,
                    kind: PitchKind::Raw,
                    sampling_rate: Some(self.config.sampling_rate),
                    mirrored: false,
                    release_fraction: None,
                });
            }
            entries.push(PitcherEntry {
                id: p.id.clone(),
                level: p.level,
                handedness: p.handedness,
                pitches,
            });
        }
        let path = dir.join("manifest.json");
        write_manifest(&path, &Manifest::new(entries))?;
        Ok(path)
    }

    /// Writes the selected normalized records.
    pub fn write_normalized(&self, dir: &Path) -> Result<PathBuf> {
        write_corpus(dir, &self.corpus()?)
    }
}
