//! Filter → detect → extract → normalize → mirror.

use serde::{Deserialize, Serialize};

use super::cutoff::{optimal_cutoff, CutoffGrid, CutoffSelection};
use super::filter::ButterworthLowpass;
use super::mirror::mirror_poses;
use super::motion::{NormalizedMotion, RawMotion};
use super::release::{detect_release, wrist_speed};
use super::segment::{extract_segment, segment_bounds, time_normalize};
use crate::error::Result;
use crate::joints::{Handedness, JointId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub cutoff_grid: CutoffGrid,
    /// Axis negated when mirroring left-handers.
    pub lateral_axis: usize,
    /// Bypasses residual analysis when set.
    pub fixed_cutoff_hz: Option<f64>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            cutoff_grid: CutoffGrid::default(),
            lateral_axis: 0,
            fixed_cutoff_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepOutcome {
    pub motion: NormalizedMotion,
    pub cutoff_hz: f64,
    /// Residual analysis details; `None` when a fixed cutoff was used.
    pub cutoff: Option<CutoffSelection>,
    /// Release frame index in the raw recording.
    pub release_frame: usize,
    pub mirrored: bool,
}

/// Runs the full preprocessing chain on one capture.
///
/// One cutoff is chosen per pitch from the throwing-wrist speed series and
/// applied to every joint coordinate independently.
pub fn preprocess(raw: &RawMotion, config: &PrepConfig) -> Result<PrepOutcome> {
    raw.validate()?;
    let fs = raw.sampling_rate;
    let (cutoff_hz, cutoff) = match config.fixed_cutoff_hz {
        Some(fc) => (fc, None),
        None => {
            let speed = wrist_speed(raw, raw.handedness.throwing_wrist());
            let sel = optimal_cutoff(&speed, fs, &config.cutoff_grid)?;
            (sel.cutoff_hz, Some(sel))
        }
    };

    let filter = ButterworthLowpass::design(fs, cutoff_hz)?;
    let mut filtered = raw.clone();
    for joint in JointId::ALL {
        for axis in 0..3 {
            let ch = filter.filtfilt(&raw.channel(joint, axis))?;
            filtered.set_channel(joint, axis, &ch);
        }
    }

    let release_frame = detect_release(&filtered)?;
    let segment = extract_segment(&filtered, release_frame)?;
    let (before, _) = segment_bounds(fs);
    let release_fraction = before as f64 / (segment.frames.len() - 1) as f64;
    let normalized = time_normalize(&segment, release_fraction)?;

    let mirrored = raw.handedness == Handedness::Left;
    let motion = if mirrored {
        let mut frames = normalized.into_frames();
        mirror_poses(&mut frames, config.lateral_axis);
        NormalizedMotion::new(frames, release_fraction, true)?
    } else {
        normalized
    };

    Ok(PrepOutcome {
        motion,
        cutoff_hz,
        cutoff,
        release_frame,
        mirrored,
    })
}
