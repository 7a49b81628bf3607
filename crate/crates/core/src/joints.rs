//! Landmark and subject enumerations shared by preprocessing and the corpus.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const JOINT_COUNT: usize = 15;

/// Anatomical landmarks in tensor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointId {
    Head,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftHeel,
    RightHeel,
    LeftToe,
    RightToe,
}

impl JointId {
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::Head,
        JointId::LeftShoulder,
        JointId::RightShoulder,
        JointId::LeftElbow,
        JointId::RightElbow,
        JointId::LeftWrist,
        JointId::RightWrist,
        JointId::LeftHip,
        JointId::RightHip,
        JointId::LeftKnee,
        JointId::RightKnee,
        JointId::LeftHeel,
        JointId::RightHeel,
        JointId::LeftToe,
        JointId::RightToe,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Column prefix used in pitch CSV headers.
    pub fn label(self) -> &'static str {
        match self {
            JointId::Head => "head",
            JointId::LeftShoulder => "l_shoulder",
            JointId::RightShoulder => "r_shoulder",
            JointId::LeftElbow => "l_elbow",
            JointId::RightElbow => "r_elbow",
            JointId::LeftWrist => "l_wrist",
            JointId::RightWrist => "r_wrist",
            JointId::LeftHip => "l_hip",
            JointId::RightHip => "r_hip",
            JointId::LeftKnee => "l_knee",
            JointId::RightKnee => "r_knee",
            JointId::LeftHeel => "l_heel",
            JointId::RightHeel => "r_heel",
            JointId::LeftToe => "l_toe",
            JointId::RightToe => "r_toe",
        }
    }

    /// Contralateral counterpart; the head maps to itself.
    pub fn mirror(self) -> Self {
        use JointId::*;
        match self {
            Head => Head,
            LeftShoulder => RightShoulder,
            RightShoulder => LeftShoulder,
            LeftElbow => RightElbow,
            RightElbow => LeftElbow,
            LeftWrist => RightWrist,
            RightWrist => LeftWrist,
            LeftHip => RightHip,
            RightHip => LeftHip,
            LeftKnee => RightKnee,
            RightKnee => LeftKnee,
            LeftHeel => RightHeel,
            RightHeel => LeftHeel,
            LeftToe => RightToe,
            RightToe => LeftToe,
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub fn throwing_wrist(self) -> JointId {
        match self {
            Handedness::Left => JointId::LeftWrist,
            Handedness::Right => JointId::RightWrist,
        }
    }
}

impl fmt::Display for Handedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Handedness::Left => "left",
            Handedness::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompetitiveLevel {
    HighSchool,
    Collegiate,
    Industrial,
    Independent,
    Professional,
}

impl CompetitiveLevel {
    pub const ALL: [CompetitiveLevel; 5] = [
        CompetitiveLevel::HighSchool,
        CompetitiveLevel::Collegiate,
        CompetitiveLevel::Industrial,
        CompetitiveLevel::Independent,
        CompetitiveLevel::Professional,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            CompetitiveLevel::HighSchool => "HighSchool",
            CompetitiveLevel::Collegiate => "Collegiate",
            CompetitiveLevel::Industrial => "Industrial",
            CompetitiveLevel::Independent => "Independent",
            CompetitiveLevel::Professional => "Professional",
        }
    }
}

impl fmt::Display for CompetitiveLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompetitiveLevel {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        CompetitiveLevel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| crate::Error::InvalidConfig(format!("unknown competitive level `{s}`")))
    }
}
