use super::motion::RawMotion;
use crate::error::{Error, Result};
use crate::joints::JointId;

/// Speed of `joint` at every frame: Euclidean norm of the central-difference
/// velocity, one-sided at the two boundary frames.
pub fn wrist_speed(motion: &RawMotion, joint: JointId) -> Vec<f64> {
    let n = motion.frames.len();
    let j = joint.index();
    let dt = 1.0 / motion.sampling_rate;
    (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let span = (hi - lo) as f64 * dt;
            let a = motion.frames[lo][j];
            let b = motion.frames[hi][j];
            let d2: f64 = (0..3).map(|k| (b[k] - a[k]).powi(2)).sum();
            d2.sqrt() / span
        })
        .collect()
}

/// Frame of maximum throwing-wrist speed.
///
/// Only interior frames (those with a central difference) are candidates.
/// Speeds within a relative `1e-12` of the maximum count as ties, and ties go
/// to the earliest frame.
pub fn detect_release(motion: &RawMotion) -> Result<usize> {
    let n = motion.frames.len();
    if n < 3 {
        return Err(Error::SeriesTooShort {
            op: "detect_release",
            len: n,
            min: 3,
        });
    }
    let speed = wrist_speed(motion, motion.handedness.throwing_wrist());
    let interior = &speed[1..n - 1];
    let max = interior.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::NoRelease);
    }
    let threshold = max * (1.0 - 1e-12);
    let idx = interior.iter().position(|&s| s >= threshold).unwrap();
    Ok(idx + 1)
}
