//! Synthetic pitching corpus with a planted kinematics → speed relation.
//!
//! Axes: x lateral, y toward the plate, z up. Every delivery is generated as a
//! right-hander and reflected for left-handers. Normalized time `u ∈ [0, 1]`
//! spans one second before release to 0.2 s after, so release sits at
//! `u = 1/1.2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::spline::CubicSpline;
use super::types::{select_top5, Corpus, MotionSample, PitcherRecord, PITCHES_PER_PITCHER};
use crate::error::{Error, Result};
use crate::joints::{CompetitiveLevel, Handedness, JointId, JOINT_COUNT};
use crate::signal::{mirror_poses, NormalizedMotion, Pose, RawMotion, NORMALIZED_FRAMES};

/// Normalized time of ball release.
pub const RELEASE_U: f64 = 1.0 / 1.2;
const WINDOW_S: f64 = 1.2;
/// Seconds per normalized frame.
const FRAME_DT: f64 = WINDOW_S / (NORMALIZED_FRAMES - 1) as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_pitchers: usize,
    pub pitches_per_pitcher: usize,
    /// Relative head counts per level, in `CompetitiveLevel::ALL` order.
    pub level_proportions: [f64; 5],
    pub left_fraction: f64,
    /// Mean efficiency offset (mph) for high-school and collegiate pitchers.
    pub intermediate_offset_mean: f64,
    /// Mean efficiency offset (mph) for the other levels.
    pub expert_offset_mean: f64,
    pub offset_sd: f64,
    /// mph per m/s of peak early pivot-hip forward velocity.
    pub hip_weight: f64,
    /// mph per rad/s of peak late shoulder-line angular rate.
    pub trunk_weight: f64,
    pub base_speed: f64,
    pub speed_noise_sd: f64,
    /// Relative per-pitch variation of the pitcher's kinematic parameters.
    pub pitch_jitter: f64,
    /// Marker noise SD in meters.
    pub position_noise: f64,
    pub sampling_rate: f64,
    /// Extra capture before and after the analysis window, seconds.
    pub margin_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_pitchers: 50,
            pitches_per_pitcher: 6,
            level_proportions: [4.0, 10.0, 20.0, 3.0, 13.0],
            left_fraction: 0.2,
            intermediate_offset_mean: -2.0,
            expert_offset_mean: 2.0,
            offset_sd: 1.0,
            hip_weight: 16.0,
            trunk_weight: 1.5,
            base_speed: 55.0,
            speed_noise_sd: 0.5,
            pitch_jitter: 0.04,
            position_noise: 0.002,
            sampling_rate: 200.0,
            margin_s: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("synthetic corpus: {m}")));
        if self.n_pitchers < 2 {
            return bad("at least 2 pitchers required");
        }
        if self.pitches_per_pitcher < PITCHES_PER_PITCHER {
            return bad("at least 5 pitches per pitcher required");
        }
        if self.level_proportions.iter().any(|p| !(*p >= 0.0)) || self.level_proportions.iter().sum::<f64>() <= 0.0 {
            return bad("level proportions must be non-negative with a positive sum");
        }
        if !(0.0..=1.0).contains(&self.left_fraction) {
            return bad("left fraction outside [0, 1]");
        }
        let sds = [
            self.offset_sd,
            self.speed_noise_sd,
            self.pitch_jitter,
            self.position_noise,
            self.margin_s,
        ];
        if sds.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("noise levels and margin must be finite and non-negative");
        }
        if !(self.sampling_rate >= 50.0 && self.sampling_rate.is_finite()) {
            return bad("sampling rate must be at least 50 Hz");
        }
        Ok(())
    }

    /// All stochastic terms off: speed is an exact linear function of the two
    /// planted features.
    pub fn noiseless(mut self) -> Self {
        self.intermediate_offset_mean = 0.0;
        self.expert_offset_mean = 0.0;
        self.offset_sd = 0.0;
        self.speed_noise_sd = 0.0;
        self.position_noise = 0.0;
        self
    }
}

/// Fixed body dimensions of one pitcher, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Morphology {
    pub height: f64,
    pub shoulder_half_width: f64,
    pub hip_half_width: f64,
    pub trunk: f64,
    pub neck_head: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    pub thigh: f64,
    pub shank: f64,
    pub foot: f64,
    pub ankle_height: f64,
}

/// Kinematic parameters of a single delivery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    /// Scale of the early pelvis drive toward the plate.
    pub hip_drive: f64,
    /// Total trunk rotation, radians.
    pub trunk_rotation: f64,
    pub pelvis_rotation: f64,
    pub stride: f64,
    /// Arm elevation, radians.
    pub arm_slot: f64,
    /// Forearm sweep through release, radians.
    pub arm_sweep: f64,
    /// Shift of the pre-release events, normalized time.
    pub tempo: f64,
    pub lean: f64,
    /// Center of the arm sweep, normalized time. Calibrated so the wrist
    /// speed peak falls exactly on [`RELEASE_U`].
    pub swing_center: f64,
}

/// Kinematic features that determine the planted ball speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedFeatures {
    /// Peak forward velocity of the pivot hip over frames 0..30, m/s.
    pub hip_velocity: f64,
    /// Peak horizontal angular rate of the shoulder line over frames 71..101,
    /// rad/s.
    pub trunk_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPitch {
    pub delivery: Delivery,
    /// Noiseless motion, right-handed frame.
    pub clean: NormalizedMotion,
    /// Clean motion plus marker noise, as a preprocessed record would look.
    pub motion: NormalizedMotion,
    pub features: PlantedFeatures,
    pub ball_speed: f64,
    /// Per-pitch marker noise seed, used again when rendering the capture.
    noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPitcher {
    pub id: String,
    pub level: CompetitiveLevel,
    pub handedness: Handedness,
    pub morphology: Morphology,
    /// Kinematics-invisible contribution to every pitch, mph.
    pub efficiency_offset: f64,
    pub pitches: Vec<SyntheticPitch>,
}

/// A generated corpus together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub config: SynthConfig,
    pub seed: u64,
    pub pitchers: Vec<SyntheticPitcher>,
}

/// Raw capture of one synthetic pitch.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedCapture {
    pub raw: RawMotion,
    /// Frame index at which the ball leaves the hand.
    pub release_frame: usize,
}

/// True for the levels pooled into the intermediate synthetic group.
pub fn is_intermediate(level: CompetitiveLevel) -> bool {
    matches!(level, CompetitiveLevel::HighSchool | CompetitiveLevel::Collegiate)
}

fn mix(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Head counts per level by largest remainder; near-equal remainders tie
/// and go to the earlier level.
fn level_counts(n: usize, proportions: &[f64; 5]) -> [usize; 5] {
    let total: f64 = proportions.iter().sum();
    let quotas: Vec<f64> = proportions.iter().map(|p| p / total * n as f64).collect();
    let mut counts = [0usize; 5];
    for (c, q) in counts.iter_mut().zip(&quotas) {
        *c = q.floor() as usize;
    }
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        if (ra - rb).abs() < 1e-9 {
            a.cmp(&b)
        } else {
            rb.total_cmp(&ra)
        }
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    counts
}

fn normal(mean: f64, sd: f64) -> Normal<f64> {
    Normal::new(mean, sd).expect("finite non-negative sd")
}

impl Morphology {
    fn sample(rng: &mut impl Rng) -> Self {
        let height = 1.8 * normal(1.0, 0.04).sample(rng);
        let mut part = |fraction: f64| height * fraction * normal(1.0, 0.03).sample(rng);
        Self {
            height,
            shoulder_half_width: part(0.105),
            hip_half_width: part(0.075),
            trunk: part(0.30),
            neck_head: part(0.13),
            upper_arm: part(0.17),
            forearm: part(0.16),
            thigh: part(0.245),
            shank: part(0.245),
            foot: part(0.14),
            ankle_height: part(0.04),
        }
    }

    fn pelvis_height(&self) -> f64 {
        self.ankle_height + 0.97 * (self.thigh + self.shank)
    }
}

impl Delivery {
    fn sample_pitcher(rng: &mut impl Rng, m: &Morphology) -> Self {
        Self {
            hip_drive: normal(1.0, 0.25).sample(rng).clamp(0.3, 2.0),
            trunk_rotation: normal(2.2, 0.25).sample(rng).clamp(1.2, 3.2),
            pelvis_rotation: normal(1.5, 0.15).sample(rng),
            stride: m.height * 0.8 * normal(1.0, 0.05).sample(rng),
            arm_slot: normal(0.5, 0.15).sample(rng),
            arm_sweep: normal(3.0, 0.2).sample(rng),
            tempo: normal(0.0, 0.01).sample(rng),
            lean: normal(0.45, 0.06).sample(rng),
            swing_center: RELEASE_U,
        }
    }

    fn jittered(&self, rng: &mut impl Rng, rel: f64) -> Self {
        let mut j = |v: f64| v * normal(1.0, rel).sample(rng);
        let scaled = Self {
            hip_drive: j(self.hip_drive),
            trunk_rotation: j(self.trunk_rotation),
            pelvis_rotation: j(self.pelvis_rotation),
            stride: j(self.stride),
            arm_slot: j(self.arm_slot),
            arm_sweep: j(self.arm_sweep),
            tempo: self.tempo,
            lean: j(self.lean),
            swing_center: RELEASE_U,
        };
        Self {
            tempo: self.tempo + normal(0.0, 0.1 * rel).sample(rng),
            ..scaled
        }
    }
}

type V3 = [f64; 3];

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

/// Chest direction for heading `theta` (0 faces +x, π/2 faces the plate).
fn chest(theta: f64) -> V3 {
    [theta.cos(), theta.sin(), 0.0]
}

/// Body-left direction for heading `theta`.
fn left(theta: f64) -> V3 {
    [-theta.sin(), theta.cos(), 0.0]
}

/// Two-link knee placement between `hip` and `ankle`, bending toward `bend`.
fn knee(hip: V3, ankle: V3, thigh: f64, shank: f64, bend: V3) -> V3 {
    let d_vec = sub(ankle, hip);
    let d = norm(d_vec).clamp((thigh - shank).abs() + 1e-6, 0.999 * (thigh + shank));
    let e = scale(d_vec, 1.0 / norm(d_vec).max(1e-9));
    let a = (thigh * thigh - shank * shank + d * d) / (2.0 * d);
    let h = (thigh * thigh - a * a).max(0.0).sqrt();
    let n = sub(bend, scale(e, dot(bend, e)));
    let n = scale(n, 1.0 / norm(n).max(1e-9));
    add(add(hip, scale(e, a)), scale(n, h))
}

/// Keyframed lead-foot and pelvis-height paths for one delivery.
struct Paths {
    lead_y: CubicSpline,
    lead_z: CubicSpline,
    pelvis_z: CubicSpline,
}

impl Paths {
    fn new(m: &Morphology, d: &Delivery) -> Self {
        let t = d.tempo;
        let knots_foot = [0.0, 0.2 + t, 0.35 + t, 0.5 + t, 0.65 + t, 0.72 + t, 1.0];
        let y0 = m.hip_half_width;
        let lead_y = CubicSpline::natural(
            &knots_foot,
            &[
                y0,
                y0,
                y0 + 0.05 * d.stride,
                y0 + 0.5 * d.stride,
                y0 + d.stride,
                y0 + d.stride,
                y0 + d.stride,
            ],
        );
        let a = m.ankle_height;
        let lift = 0.3 * m.height;
        let lead_z = CubicSpline::natural(&knots_foot, &[a, a + 0.3 * lift, a + lift, a + 0.5 * lift, a, a, a]);
        let ph = m.pelvis_height();
        let pelvis_z = CubicSpline::natural(
            &[0.0, 0.35 + t, 0.55 + t, 0.65 + t, 0.8 + t, 1.0],
            &[ph, 1.01 * ph, 0.95 * ph, 0.88 * ph, 0.86 * ph, 0.86 * ph],
        );
        Self {
            lead_y,
            lead_z,
            pelvis_z,
        }
    }
}

/// Right-handed pose at normalized time `u` (may lie outside `[0, 1]`).
fn pose_at(m: &Morphology, d: &Delivery, paths: &Paths, u: f64) -> Pose {
    let t = d.tempo;
    let ev = |center: f64, width: f64| sigmoid((u - center - t) / width);

    // Pelvis: early drive toward the plate, then the stride carries it.
    let drive = 0.12 * d.hip_drive * (m.height / 1.8) * ev(0.15, 0.05);
    let stride = 0.55 * d.stride * ev(0.58, 0.07) + 0.1 * d.stride * ev(0.8, 0.05);
    let pelvis: V3 = [0.0, drive + stride, paths.pelvis_z.eval(u)];
    let theta_p = -0.2 + d.pelvis_rotation * ev(0.68, 0.05);
    let theta_t = -0.3 + d.trunk_rotation * ev(0.76, 0.04);

    let lh = add(pelvis, scale(left(theta_p), m.hip_half_width));
    let rh = add(pelvis, scale(left(theta_p), -m.hip_half_width));

    let lean = d.lean * ev(0.8, 0.05);
    let up = add(scale(chest(theta_t), lean.sin()), [0.0, 0.0, lean.cos()]);
    let neck = add(pelvis, scale(up, m.trunk));
    let ls = add(neck, scale(left(theta_t), m.shoulder_half_width));
    let rs = add(neck, scale(left(theta_t), -m.shoulder_half_width));
    let head = add(neck, scale(up, m.neck_head));

    // Throwing arm: sweeps from laid back to forward, centered on release.
    let right = scale(left(theta_t), -1.0);
    let fwd = chest(theta_t);
    let swing = sigmoid((u - d.swing_center) / 0.018);
    let arm_dir = |phi: f64, elev: f64| {
        let lateral = add(scale(right, elev.cos()), [0.0, 0.0, elev.sin()]);
        add(scale(lateral, phi.cos()), scale(fwd, phi.sin()))
    };
    let break_hands = ev(0.45, 0.08);
    let phi_e = 0.6 - 1.0 * break_hands + 0.45 * d.arm_sweep * swing;
    let phi_w = 0.9 - 1.6 * break_hands + d.arm_sweep * swing;
    let re = add(rs, scale(arm_dir(phi_e, d.arm_slot), m.upper_arm));
    let rw = add(re, scale(arm_dir(phi_w, d.arm_slot + 0.9 * (1.0 - swing)), m.forearm));

    // Glove arm: reaches toward the plate, then tucks.
    let tuck = ev(0.75, 0.06);
    let glove_dir = |phi: f64| {
        let lateral = add(scale(left(theta_t), 0.95), [0.0, 0.0, 0.3]);
        add(scale(lateral, phi.cos()), scale(fwd, phi.sin()))
    };
    let le = add(ls, scale(glove_dir(0.3 - 0.4 * tuck + 0.6 * break_hands), m.upper_arm));
    let lw = add(le, scale(glove_dir(0.5 + 0.8 * tuck + 0.4 * break_hands), m.forearm));

    // Pivot foot stays on the rubber until it drags after release.
    let drag = ev(0.86, 0.05);
    let rheel: V3 = [
        0.0,
        -m.hip_half_width + 0.25 * d.stride * drag,
        m.ankle_height + 0.1 * drag,
    ];
    let rtoe = add(
        rheel,
        [m.foot * (1.0 - 0.5 * drag), 0.3 * m.foot * drag, -0.8 * m.ankle_height],
    );
    let rk = knee(rh, rheel, m.thigh, m.shank, [1.0, 0.3, 0.0]);

    let heading = 1.2 * ev(0.55, 0.06);
    let lheel: V3 = [
        0.05 * m.height * ev(0.5, 0.1),
        paths.lead_y.eval(u),
        paths.lead_z.eval(u),
    ];
    let lfoot = [heading.cos(), heading.sin(), 0.0];
    let ltoe = add(add(lheel, scale(lfoot, m.foot)), [0.0, 0.0, -0.8 * m.ankle_height]);
    let lk = knee(lh, lheel, m.thigh, m.shank, add(lfoot, [0.0, 0.0, 0.2]));

    let mut pose = [[0.0; 3]; JOINT_COUNT];
    use JointId::*;
    for (j, p) in [
        (Head, head),
        (LeftShoulder, ls),
        (RightShoulder, rs),
        (LeftElbow, le),
        (RightElbow, re),
        (LeftWrist, lw),
        (RightWrist, rw),
        (LeftHip, lh),
        (RightHip, rh),
        (LeftKnee, lk),
        (RightKnee, rk),
        (LeftHeel, lheel),
        (RightHeel, rheel),
        (LeftToe, ltoe),
        (RightToe, rtoe),
    ] {
        pose[j.index()] = p;
    }
    pose
}

fn wrist_speed_at(m: &Morphology, d: &Delivery, paths: &Paths, u: f64) -> f64 {
    const H: f64 = 1e-5;
    let w = JointId::RightWrist.index();
    let a = pose_at(m, d, paths, u - H)[w];
    let b = pose_at(m, d, paths, u + H)[w];
    norm(sub(b, a)) / (2.0 * H)
}

/// Shifts the sweep until the continuous wrist speed peaks at release.
fn calibrate_swing(m: &Morphology, d: &mut Delivery, paths: &Paths) {
    for _ in 0..4 {
        let (mut best_u, mut best) = (RELEASE_U, f64::NEG_INFINITY);
        for i in -200..=200 {
            let u = RELEASE_U + i as f64 * 2.5e-4;
            let s = wrist_speed_at(m, d, paths, u);
            if s > best {
                (best_u, best) = (u, s);
            }
        }
        let shift = best_u - RELEASE_U;
        if shift.abs() < 1e-4 {
            break;
        }
        d.swing_center -= shift;
    }
}

/// Peak early pivot-hip forward velocity and peak late shoulder-line angular
/// rate of a normalized right-handed (or mirrored) motion.
pub fn planted_features(motion: &NormalizedMotion) -> PlantedFeatures {
    let f = motion.frames();
    let hip = JointId::RightHip.index();
    let hip_velocity = (0..30usize)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), k + 1);
            (f[b][hip][1] - f[a][hip][1]) / ((b - a) as f64 * FRAME_DT)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let (l, r) = (JointId::LeftShoulder.index(), JointId::RightShoulder.index());
    let line = |k: usize| [f[k][l][0] - f[k][r][0], f[k][l][1] - f[k][r][1]];
    let trunk_rate = (71..NORMALIZED_FRAMES)
        .map(|k| {
            let (a, b) = (k - 1, (k + 1).min(NORMALIZED_FRAMES - 1));
            let (p, q) = (line(a), line(b));
            let angle = (p[0] * q[1] - p[1] * q[0]).atan2(p[0] * q[0] + p[1] * q[1]);
            angle / ((b - a) as f64 * FRAME_DT)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    PlantedFeatures {
        hip_velocity,
        trunk_rate,
    }
}

fn add_noise(poses: &mut [Pose], sd: f64, seed: u64) {
    if sd == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = normal(0.0, sd);
    for v in poses.iter_mut().flatten().flatten() {
        *v += noise.sample(&mut rng);
    }
}

/// Generates a corpus. Identical `(config, seed)` give bit-identical output.
pub fn synthesize_corpus(config: &SynthConfig, seed: u64) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let counts = level_counts(config.n_pitchers, &config.level_proportions);
    let mut levels: Vec<CompetitiveLevel> = CompetitiveLevel::ALL
        .iter()
        .zip(counts)
        .flat_map(|(l, c)| std::iter::repeat_n(*l, c))
        .collect();
    // Fisher-Yates so truncated corpora still mix levels
    for i in (1..levels.len()).rev() {
        levels.swap(i, master.random_range(0..=i));
    }
    let n_left = (config.left_fraction * config.n_pitchers as f64).round() as usize;
    let mut hands = vec![Handedness::Right; config.n_pitchers];
    for h in hands.iter_mut().take(n_left) {
        *h = Handedness::Left;
    }
    for i in (1..hands.len()).rev() {
        hands.swap(i, master.random_range(0..=i));
    }

    let frames_u: Vec<f64> = (0..NORMALIZED_FRAMES)
        .map(|k| k as f64 / (NORMALIZED_FRAMES - 1) as f64)
        .collect();
    let mut pitchers = Vec::with_capacity(config.n_pitchers);
    for (i, (level, handedness)) in levels.into_iter().zip(hands).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, i as u64 + 1));
        let morphology = Morphology::sample(&mut rng);
        let base = Delivery::sample_pitcher(&mut rng, &morphology);
        let mean = if is_intermediate(level) {
            config.intermediate_offset_mean
        } else {
            config.expert_offset_mean
        };
        let efficiency_offset = mean + config.offset_sd * normal(0.0, 1.0).sample(&mut rng);
        let mirrored = handedness == Handedness::Left;

        let mut pitches = Vec::with_capacity(config.pitches_per_pitcher);
        for _ in 0..config.pitches_per_pitcher {
            let mut delivery = base.jittered(&mut rng, config.pitch_jitter);
            let paths = Paths::new(&morphology, &delivery);
            calibrate_swing(&morphology, &mut delivery, &paths);
            let frames: Vec<Pose> = frames_u
                .iter()
                .map(|&u| pose_at(&morphology, &delivery, &paths, u))
                .collect();
            let clean = NormalizedMotion::new(frames.clone(), RELEASE_U, mirrored)?;
            let features = planted_features(&clean);
            let speed_noise = config.speed_noise_sd * normal(0.0, 1.0).sample(&mut rng);
            let ball_speed = config.base_speed
                + config.hip_weight * features.hip_velocity
                + config.trunk_weight * features.trunk_rate
                + efficiency_offset
                + speed_noise;
            let noise_seed = rng.random();
            let mut noisy = frames;
            add_noise(&mut noisy, config.position_noise, noise_seed);
            let motion = NormalizedMotion::new(noisy, RELEASE_U, mirrored)?;
            pitches.push(SyntheticPitch {
                delivery,
                clean,
                motion,
                features,
                ball_speed,
                noise_seed,
            });
        }
        pitchers.push(SyntheticPitcher {
            id: format!("S{:03}", i + 1),
            level,
            handedness,
            morphology,
            efficiency_offset,
            pitches,
        });
    }
    Ok(SyntheticCorpus {
        config: config.clone(),
        seed,
        pitchers,
    })
}

impl SyntheticPitcher {
    /// Raw capture of pitch `index` in the pitcher's own handedness, with
    /// marker noise and the configured margins around the analysis window.
    pub fn render(&self, index: usize, config: &SynthConfig) -> Result<RenderedCapture> {
        let pitch = &self.pitches[index];
        let fs = config.sampling_rate;
        let paths = Paths::new(&self.morphology, &pitch.delivery);
        let before = ((1.0 + config.margin_s) * fs).round() as usize;
        let after = ((0.2 + config.margin_s) * fs).round() as usize;
        let mut frames: Vec<Pose> = (0..before + after + 1)
            .map(|i| {
                let t = (i as f64 - before as f64) / fs;
                pose_at(&self.morphology, &pitch.delivery, &paths, (t + 1.0) / WINDOW_S)
            })
            .collect();
        add_noise(&mut frames, config.position_noise, pitch.noise_seed);
        if self.handedness == Handedness::Left {
            mirror_poses(&mut frames, 0);
        }
        Ok(RenderedCapture {
            raw: RawMotion::new(frames, fs, self.handedness)?,
            release_frame: before,
        })
    }
}

impl SyntheticCorpus {
    /// Records after top-5 selection, built from the normalized motions.
    pub fn records(&self) -> Result<Vec<PitcherRecord>> {
        self.pitchers
            .iter()
            .map(|p| {
                let samples = p
                    .pitches
                    .iter()
                    .map(|s| MotionSample::new(s.motion.clone(), s.ball_speed, p.id.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(PitcherRecord {
                    id: p.id.clone(),
                    level: p.level,
                    handedness: p.handedness,
                    pitches: select_top5(samples, |s| s.ball_speed)?,
                })
            })
            .collect()
    }

    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::new(self.records()?)
    }
}
