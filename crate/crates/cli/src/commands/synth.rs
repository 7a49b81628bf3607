//! `synth`: writes a seeded synthetic corpus plus its planted truth.

use crossind_core::dataset::synthesize_corpus;
use crossind_core::error::Error;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, replace_dir, CsvOut};

pub const CORPUS_DIR: &str = "corpus";
pub const TRUTH_FILE: &str = "synth_truth.csv";
pub const TRUTH_SCHEMA: &str = "synth-truth-v1";

pub fn run(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let synth = synthesize_corpus(&config.synth, config.seed)?;
    log::info!(
        "synth: {} pitchers x {} pitches, seed {}",
        synth.pitchers.len(),
        config.synth.pitches_per_pitcher,
        config.seed
    );

    let mut truth = CsvOut::new(&[
        "schema",
        "pitcher",
        "level",
        "handedness",
        "efficiency_offset",
        "pitch",
        "ball_speed",
        "hip_velocity",
        "trunk_rate",
        "release_frame",
    ]);
    for p in &synth.pitchers {
        for (k, pitch) in p.pitches.iter().enumerate() {
            // raw captures carry their own planted release frame
            let release = if config.synth_raw {
                p.render(k, &synth.config)?.release_frame.to_string()
            } else {
                String::new()
            };
            truth.row([
                TRUTH_SCHEMA.to_string(),
                p.id.clone(),
                p.level.to_string(),
                p.handedness.to_string(),
                num(p.efficiency_offset),
                (k + 1).to_string(),
                num(pitch.ball_speed),
                num(pitch.features.hip_velocity),
                num(pitch.features.trunk_rate),
                release,
            ]);
        }
    }

    let dir = config.out.join(CORPUS_DIR);
    replace_dir(&dir, |tmp| {
        let written: Result<_, Error> = if config.synth_raw {
            synth.write_raw(tmp)
        } else {
            synth.write_normalized(tmp)
        };
        written.map(|_| ()).map_err(CliError::from)
    })?;
    truth.finish(&config.out.join(TRUTH_FILE))?;
    Ok(vec![format!("{CORPUS_DIR}/manifest.json"), TRUTH_FILE.into()])
}
