//! Conversion of raw variable-rate captures into fixed-length, right-handed
//! pitch representations.
//!
//! The full chain is [`pipeline::preprocess`]: low-pass filtering with a
//! per-pitch cutoff, release detection on the throwing wrist, extraction of
//! the window from 1.0 s before to 0.2 s after release, resampling to 101
//! frames and, for left-handers, reflection onto the right-handed frame.

mod cutoff;
mod filter;
mod mirror;
mod motion;
pub mod pipeline;
mod release;
mod segment;

pub use cutoff::{optimal_cutoff, CutoffGrid, CutoffSelection};
pub use filter::{butterworth_lowpass, Biquad, ButterworthLowpass, FILTER_ORDER};
pub use mirror::{mirror, mirror_poses};
pub use motion::{NormalizedMotion, Pose, RawMotion, NORMALIZED_FRAMES};
pub use pipeline::{preprocess, PrepConfig, PrepOutcome};
pub use release::{detect_release, wrist_speed};
pub use segment::{extract_segment, time_normalize, SEGMENT_AFTER_S, SEGMENT_BEFORE_S};
