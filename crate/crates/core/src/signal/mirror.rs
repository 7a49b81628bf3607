use super::motion::{Pose, RawMotion};
use crate::error::{Error, Result};
use crate::joints::{Handedness, JointId, JOINT_COUNT};

/// Reflects poses across the plane normal to `lateral_axis` and swaps
/// left/right labels.
pub fn mirror_poses(frames: &mut [Pose], lateral_axis: usize) {
    for pose in frames.iter_mut() {
        let src = *pose;
        for j in JointId::ALL {
            let mut p = src[j.mirror().index()];
            p[lateral_axis] = -p[lateral_axis];
            pose[j.index()] = p;
        }
    }
    debug_assert!(frames.iter().all(|p| p.len() == JOINT_COUNT));
}

/// Maps a left-handed delivery onto the right-handed frame.
pub fn mirror(motion: &RawMotion, lateral_axis: usize) -> Result<RawMotion> {
    if motion.handedness == Handedness::Right {
        return Err(Error::AlreadyRightHanded);
    }
    let mut out = motion.clone();
    mirror_poses(&mut out.frames, lateral_axis);
    out.handedness = Handedness::Right;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose_series() -> Vec<Pose> {
        (0..5)
            .map(|t| {
                let mut p = [[0.0; 3]; JOINT_COUNT];
                for (j, xyz) in p.iter_mut().enumerate() {
                    let s = (t * 15 + j) as f64;
                    *xyz = [s.sin(), (1.3 * s).cos(), 0.1 * s];
                }
                p
            })
            .collect()
    }

    #[test]
    fn left_wrist_point_reflects_onto_right_wrist() {
        let mut p = [[0.0; 3]; JOINT_COUNT];
        p[JointId::LeftWrist.index()] = [0.4, 1.1, 1.6];
        let m = RawMotion::new(vec![p, p], 200.0, Handedness::Left).unwrap();
        let r = mirror(&m, 0).unwrap();
        assert_eq!(r.frames[0][JointId::RightWrist.index()], [-0.4, 1.1, 1.6]);
        assert_eq!(r.frames[0][JointId::LeftWrist.index()], [0.0, 0.0, 0.0]);
        assert_eq!(r.handedness, Handedness::Right);
    }

    #[test]
    fn refuses_right_handed_input() {
        let m = RawMotion::new(pose_series(), 200.0, Handedness::Right).unwrap();
        assert!(matches!(mirror(&m, 0), Err(Error::AlreadyRightHanded)));
    }

    #[test]
    fn double_reflection_restores_data() {
        let original = pose_series();
        let mut frames = original.clone();
        mirror_poses(&mut frames, 0);
        assert_ne!(frames, original);
        mirror_poses(&mut frames, 0);
        assert_eq!(frames, original);
    }

    #[test]
    fn reflection_preserves_inter_joint_distances() {
        let original = pose_series();
        let mut frames = original.clone();
        mirror_poses(&mut frames, 0);
        let dist =
            |p: &Pose, a: usize, b: usize| -> f64 { (0..3).map(|k| (p[a][k] - p[b][k]).powi(2)).sum::<f64>().sqrt() };
        for (o, m) in original.iter().zip(&frames) {
            for a in JointId::ALL {
                for b in JointId::ALL {
                    let d0 = dist(o, a.index(), b.index());
                    let d1 = dist(m, a.mirror().index(), b.mirror().index());
                    assert!((d0 - d1).abs() < 1e-12);
                }
            }
        }
    }
}
