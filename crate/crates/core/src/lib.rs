//! Cross-individual generalizability benchmark for motion-to-outcome
//! regression on pitching captures.
//!
//! - [`signal`]: raw capture → 101-frame normalized pitch
//! - [`dataset`]: corpus model, file formats, selection, spatiotemporal
//!   restriction and a synthetic corpus generator
//! - [`models`]: transformer-encoder and graph-conv + GRU regressors
//! - [`harness`]: leave-one-subject-out and within-individual evaluation
//! - [`analysis`]: expertise grouping, error statistics and the
//!   region × window ablation

pub mod analysis;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod joints;
pub mod models;
pub mod signal;

pub use error::{Error, Result};
pub use joints::{CompetitiveLevel, Handedness, JointId, JOINT_COUNT};
