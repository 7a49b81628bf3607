//! Skeleton adjacency and graph-convolution propagation matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joints::{JointId, JOINT_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `D^{-1/2} (A + I) D^{-1/2}`
    #[default]
    Symmetric,
    /// `D^{-1} (A + I)`; rows sum to one.
    RandomWalk,
}

/// Undirected graph over the 15 landmarks. Self-loops are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    edges: Vec<(JointId, JointId)>,
}

impl Default for SkeletonGraph {
    /// Anatomical chain: head to both shoulders, shoulder girdle, arms,
    /// shoulder to hip on each side, pelvis, legs down to the toes.
    fn default() -> Self {
        use JointId::*;
        Self::new(vec![
            (Head, LeftShoulder),
            (Head, RightShoulder),
            (LeftShoulder, RightShoulder),
            (LeftShoulder, LeftElbow),
            (LeftElbow, LeftWrist),
            (RightShoulder, RightElbow),
            (RightElbow, RightWrist),
            (LeftShoulder, LeftHip),
            (RightShoulder, RightHip),
            (LeftHip, RightHip),
            (LeftHip, LeftKnee),
            (LeftKnee, LeftHeel),
            (LeftHeel, LeftToe),
            (RightHip, RightKnee),
            (RightKnee, RightHeel),
            (RightHeel, RightToe),
        ])
    }
}

impl SkeletonGraph {
    pub fn new(mut edges: Vec<(JointId, JointId)>) -> Self {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.retain(|(a, b)| a != b);
        edges.sort();
        edges.dedup();
        Self { edges }
    }

    pub fn edges(&self) -> &[(JointId, JointId)] {
        &self.edges
    }

    /// `A + I` over all 15 joints, row-major.
    pub fn adjacency(&self) -> Vec<f64> {
        let mut a = vec![0.0; JOINT_COUNT * JOINT_COUNT];
        for i in 0..JOINT_COUNT {
            a[i * JOINT_COUNT + i] = 1.0;
        }
        for (u, v) in &self.edges {
            a[u.index() * JOINT_COUNT + v.index()] = 1.0;
            a[v.index() * JOINT_COUNT + u.index()] = 1.0;
        }
        a
    }

    /// Normalized propagation matrix of the subgraph induced by `joints`
    /// (in the given order), `J × J` row-major.
    pub fn propagation(&self, joints: &[JointId], norm: Normalization) -> Result<Vec<f64>> {
        if joints.is_empty() {
            return Err(Error::EmptySubgraph);
        }
        let full = self.adjacency();
        let n = joints.len();
        let mut a = vec![0.0; n * n];
        for (r, ji) in joints.iter().enumerate() {
            for (c, jj) in joints.iter().enumerate() {
                a[r * n + c] = full[ji.index() * JOINT_COUNT + jj.index()];
            }
        }
        Ok(normalize(&a, n, norm))
    }
}

/// Normalizes a square `A + I` matrix.
pub fn normalize(a: &[f64], n: usize, norm: Normalization) -> Vec<f64> {
    let degree: Vec<f64> = (0..n).map(|r| a[r * n..(r + 1) * n].iter().sum()).collect();
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = match norm {
                Normalization::Symmetric => a[r * n + c] / (degree[r] * degree[c]).sqrt(),
                Normalization::RandomWalk => a[r * n + c] / degree[r],
            };
        }
    }
    out
}
