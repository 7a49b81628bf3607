use crate::error::{Error, Result};
use crate::joints::{Handedness, JointId, JOINT_COUNT};

/// Positions of every landmark at one instant, indexed by [`JointId`], in
/// meters.
pub type Pose = [[f64; 3]; JOINT_COUNT];

pub const NORMALIZED_FRAMES: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct RawMotion {
    pub frames: Vec<Pose>,
    pub sampling_rate: f64,
    pub handedness: Handedness,
}

impl RawMotion {
    pub fn new(frames: Vec<Pose>, sampling_rate: f64, handedness: Handedness) -> Result<Self> {
        let m = Self {
            frames,
            sampling_rate,
            handedness,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_rate > 0.0 && self.sampling_rate.is_finite()) {
            return Err(Error::InvalidMotion(format!(
                "sampling rate {} must be positive",
                self.sampling_rate
            )));
        }
        if self.frames.len() < 2 {
            return Err(Error::InvalidMotion(format!(
                "{} frames; at least 2 required",
                self.frames.len()
            )));
        }
        if let Some(i) = self.frames.iter().position(|p| !pose_finite(p)) {
            return Err(Error::InvalidMotion(format!("non-finite position in frame {i}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        (self.frames.len() - 1) as f64 / self.sampling_rate
    }

    pub fn channel(&self, joint: JointId, axis: usize) -> Vec<f64> {
        self.frames.iter().map(|p| p[joint.index()][axis]).collect()
    }

    pub fn set_channel(&mut self, joint: JointId, axis: usize, values: &[f64]) {
        for (p, v) in self.frames.iter_mut().zip(values) {
            p[joint.index()][axis] = *v;
        }
    }
}

pub(crate) fn pose_finite(p: &Pose) -> bool {
    p.iter().flatten().all(|v| v.is_finite())
}

/// A pitch resampled onto 101 evenly spaced instants.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMotion {
    frames: Vec<Pose>,
    /// Position of ball release in normalized time, in `[0, 1]`.
    pub release_fraction: f64,
    /// True when the capture was reflected from a left-handed delivery.
    pub mirrored: bool,
}

impl NormalizedMotion {
    pub fn new(frames: Vec<Pose>, release_fraction: f64, mirrored: bool) -> Result<Self> {
        if frames.len() != NORMALIZED_FRAMES {
            return Err(Error::InvalidMotion(format!(
                "normalized motion needs {NORMALIZED_FRAMES} frames, got {}",
                frames.len()
            )));
        }
        if let Some(i) = frames.iter().position(|p| !pose_finite(p)) {
            return Err(Error::InvalidMotion(format!("non-finite position in frame {i}")));
        }
        Ok(Self {
            frames,
            release_fraction,
            mirrored,
        })
    }

    pub fn frames(&self) -> &[Pose] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Pose> {
        self.frames
    }

    /// Row-major `frames × joints × 3` buffer.
    pub fn to_flat(&self) -> Vec<f64> {
        self.frames.iter().flatten().flatten().copied().collect()
    }

    pub fn from_flat(data: &[f64], release_fraction: f64, mirrored: bool) -> Result<Self> {
        if data.len() != NORMALIZED_FRAMES * JOINT_COUNT * 3 {
            return Err(Error::InvalidMotion(format!(
                "flat buffer of length {} does not hold {NORMALIZED_FRAMES}x{JOINT_COUNT}x3",
                data.len()
            )));
        }
        let frames = data
            .chunks(JOINT_COUNT * 3)
            .map(|f| {
                let mut pose = [[0.0; 3]; JOINT_COUNT];
                for (j, xyz) in f.chunks(3).enumerate() {
                    pose[j].copy_from_slice(xyz);
                }
                pose
            })
            .collect();
        Self::new(frames, release_fraction, mirrored)
    }
}
