use super::motion::{NormalizedMotion, Pose, RawMotion, NORMALIZED_FRAMES};
use crate::error::{Error, Result};
use crate::joints::JOINT_COUNT;

pub const SEGMENT_BEFORE_S: f64 = 1.0;
pub const SEGMENT_AFTER_S: f64 = 0.2;

/// Frame counts `(before, after)` release at sampling rate `fs`.
pub fn segment_bounds(fs: f64) -> (usize, usize) {
    let before = (SEGMENT_BEFORE_S * fs).round() as usize;
    let total = ((SEGMENT_BEFORE_S + SEGMENT_AFTER_S) * fs).round() as usize;
    (before, total - before)
}

/// Frames from 1.0 s before to 0.2 s after `release`, inclusive:
/// `round(1.2·fs) + 1` frames.
pub fn extract_segment(motion: &RawMotion, release: usize) -> Result<RawMotion> {
    let fs = motion.sampling_rate;
    let (before, after) = segment_bounds(fs);
    if release < before {
        return Err(Error::InsufficientCoverage {
            side: "before",
            needed_s: SEGMENT_BEFORE_S,
            missing_s: (before - release) as f64 / fs,
        });
    }
    let last = motion.frames.len() - 1;
    if release + after > last {
        return Err(Error::InsufficientCoverage {
            side: "after",
            needed_s: SEGMENT_AFTER_S,
            missing_s: (release + after - last) as f64 / fs,
        });
    }
    Ok(RawMotion {
        frames: motion.frames[release - before..=release + after].to_vec(),
        sampling_rate: fs,
        handedness: motion.handedness,
    })
}

/// Linear resampling onto `k/100·duration`, `k = 0..=100`. Endpoints are
/// reproduced exactly.
pub fn time_normalize(segment: &RawMotion, release_fraction: f64) -> Result<NormalizedMotion> {
    let n = segment.frames.len();
    if n < 2 {
        return Err(Error::SeriesTooShort {
            op: "time_normalize",
            len: n,
            min: 2,
        });
    }
    let steps = (NORMALIZED_FRAMES - 1) as f64;
    let frames: Vec<Pose> = (0..NORMALIZED_FRAMES)
        .map(|k| {
            let pos = k as f64 * (n - 1) as f64 / steps;
            let i = (pos.floor() as usize).min(n - 2);
            let w = pos - i as f64;
            let (a, b) = (&segment.frames[i], &segment.frames[i + 1]);
            let mut out = [[0.0; 3]; JOINT_COUNT];
            for j in 0..JOINT_COUNT {
                for c in 0..3 {
                    out[j][c] = (1.0 - w) * a[j][c] + w * b[j][c];
                }
            }
            out
        })
        .collect();
    NormalizedMotion::new(frames, release_fraction, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joints::Handedness;

    fn ramp_motion(n: usize, fs: f64) -> RawMotion {
        let frames = (0..n)
            .map(|i| {
                let mut p = [[0.0; 3]; JOINT_COUNT];
                for (j, xyz) in p.iter_mut().enumerate() {
                    *xyz = [i as f64, 2.0 * i as f64 + j as f64, -0.5 * i as f64];
                }
                p
            })
            .collect();
        RawMotion::new(frames, fs, Handedness::Right).unwrap()
    }

    #[test]
    fn segment_at_200_hz() {
        let m = ramp_motion(500, 200.0);
        let s = extract_segment(&m, 300).unwrap();
        assert_eq!(s.frames.len(), 241);
        assert_eq!(s.frames[0][0][0], 100.0);
        assert_eq!(s.frames[240][0][0], 340.0);
    }

    #[test]
    fn segment_at_500_hz() {
        let m = ramp_motion(1000, 500.0);
        assert_eq!(extract_segment(&m, 600).unwrap().frames.len(), 601);
    }

    #[test]
    fn early_release_reports_missing_duration() {
        let m = ramp_motion(500, 200.0);
        match extract_segment(&m, 150) {
            Err(Error::InsufficientCoverage { side, missing_s, .. }) => {
                assert_eq!(side, "before");
                assert!((missing_s - 0.25).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            extract_segment(&m, 470),
            Err(Error::InsufficientCoverage { side: "after", .. })
        ));
    }

    #[test]
    fn normalize_identity_on_101_frames() {
        let m = ramp_motion(101, 100.0);
        let n = time_normalize(&m, 0.5).unwrap();
        assert_eq!(n.frames(), &m.frames[..]);
    }

    #[test]
    fn normalize_is_exact_on_ramps() {
        let m = ramp_motion(241, 200.0);
        let n = time_normalize(&m, 0.8).unwrap();
        for (k, p) in n.frames().iter().enumerate() {
            let t = 2.4 * k as f64;
            assert!((p[3][0] - t).abs() < 1e-12);
            assert!((p[3][1] - (2.0 * t + 3.0)).abs() < 1e-12);
        }
        assert_eq!(n.frames()[0], m.frames[0]);
        assert_eq!(n.frames()[100], m.frames[240]);
    }
}
