//! Body-region and cumulative time-window restriction of model inputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::types::MotionSample;
use crate::error::{Error, Result};
use crate::joints::JointId;
use crate::signal::NORMALIZED_FRAMES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    ThrowingArm,
    LeadingArm,
    Trunk,
    PivotLeg,
    LeadingLeg,
    WholeBody,
}

impl Region {
    /// The five regions of the spatial ablation (excludes `WholeBody`).
    pub const ABLATION: [Region; 5] = [
        Region::ThrowingArm,
        Region::LeadingArm,
        Region::Trunk,
        Region::PivotLeg,
        Region::LeadingLeg,
    ];

    /// Member joints in tensor order. Shoulders and hips belong to more than
    /// one region.
    pub fn joints(self) -> Vec<JointId> {
        use JointId::*;
        match self {
            Region::ThrowingArm => vec![RightShoulder, RightElbow, RightWrist],
            Region::LeadingArm => vec![LeftShoulder, LeftElbow, LeftWrist],
            Region::Trunk => vec![Head, LeftShoulder, RightShoulder, LeftHip, RightHip],
            Region::PivotLeg => vec![RightHip, RightKnee, RightHeel, RightToe],
            Region::LeadingLeg => vec![LeftHip, LeftKnee, LeftHeel, LeftToe],
            Region::WholeBody => JointId::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::ThrowingArm => "throwing_arm",
            Region::LeadingArm => "leading_arm",
            Region::Trunk => "trunk",
            Region::PivotLeg => "pivot_leg",
            Region::LeadingLeg => "leading_leg",
            Region::WholeBody => "whole_body",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Region::WholeBody]
            .into_iter()
            .chain(Region::ABLATION)
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown region `{s}`")))
    }
}

/// Cumulative time window `w ∈ 1..=10`: the first `10·w` frames, with the
/// last window also covering the final frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowSpec(u8);

impl WindowSpec {
    pub const COUNT: usize = 10;
    pub const FULL: WindowSpec = WindowSpec(10);

    pub fn new(w: usize) -> Result<Self> {
        if (1..=Self::COUNT).contains(&w) {
            Ok(Self(w as u8))
        } else {
            Err(Error::InvalidConfig(format!("window {w} outside 1..=10")))
        }
    }

    pub fn all() -> impl Iterator<Item = WindowSpec> {
        (1..=Self::COUNT as u8).map(WindowSpec)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn frames(self) -> usize {
        if self.index() == Self::COUNT {
            NORMALIZED_FRAMES
        } else {
            10 * self.index()
        }
    }
}

/// A model input: `frames × joints × 3`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSample {
    pub frames: usize,
    pub joints: Vec<JointId>,
    pub data: Vec<f64>,
    pub ball_speed: f64,
    pub pitcher_id: String,
}

impl RestrictedSample {
    pub fn dims(&self) -> (usize, usize) {
        (self.frames, self.joints.len())
    }
}

/// Drops the channels outside `region` and the frames after `window`.
pub fn restrict(sample: &MotionSample, region: Region, window: WindowSpec) -> RestrictedSample {
    let joints = region.joints();
    let frames = window.frames();
    let mut data = Vec::with_capacity(frames * joints.len() * 3);
    for pose in &sample.motion.frames()[..frames] {
        for j in &joints {
            data.extend_from_slice(&pose[j.index()]);
        }
    }
    RestrictedSample {
        frames,
        joints,
        data,
        ball_speed: sample.ball_speed,
        pitcher_id: sample.pitcher_id.clone(),
    }
}
