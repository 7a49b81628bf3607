//! Per-pitcher prediction errors split by expertise group.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grouping::GroupingResult;
use super::stats::{pooled_t_test, TestResult};
use crate::error::{Error, Result};
use crate::harness::{mean, sample_sd, EvaluationResult};
use crate::joints::CompetitiveLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Intermediate,
    Expert,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Intermediate => "intermediate",
            Group::Expert => "expert",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitcherError {
    pub pitcher_id: String,
    pub level: CompetitiveLevel,
    pub group: Group,
    /// Mean absolute error over the held-out pitches, mph.
    pub mae: f64,
    /// Mean prediction minus mean truth, mph.
    pub signed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub mae_mean: f64,
    pub mae_sd: f64,
    pub signed_mean: f64,
    pub signed_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub pitchers: Vec<PitcherError>,
    pub intermediate: GroupSummary,
    pub expert: GroupSummary,
}

impl ErrorStats {
    fn values(&self, group: Group, f: impl Fn(&PitcherError) -> f64) -> Vec<f64> {
        self.pitchers.iter().filter(|p| p.group == group).map(f).collect()
    }

    /// Intermediate vs expert on absolute error.
    pub fn mae_test(&self) -> Result<TestResult> {
        pooled_t_test(
            &self.values(Group::Intermediate, |p| p.mae),
            &self.values(Group::Expert, |p| p.mae),
        )
    }

    /// Intermediate vs expert on signed error.
    pub fn signed_test(&self) -> Result<TestResult> {
        pooled_t_test(
            &self.values(Group::Intermediate, |p| p.signed),
            &self.values(Group::Expert, |p| p.signed),
        )
    }
}

fn summarize(rows: &[&PitcherError]) -> GroupSummary {
    let mae: Vec<f64> = rows.iter().map(|p| p.mae).collect();
    let signed: Vec<f64> = rows.iter().map(|p| p.signed).collect();
    let m = |v: &[f64]| if v.is_empty() { f64::NAN } else { mean(v) };
    GroupSummary {
        n: rows.len(),
        mae_mean: m(&mae),
        mae_sd: sample_sd(&mae),
        signed_mean: m(&signed),
        signed_sd: sample_sd(&signed),
    }
}

/// Absolute and signed error per pitcher from one evaluation.
///
/// When `roster` is given, every listed pitcher must have been evaluated.
pub fn error_stats(
    evaluation: &EvaluationResult,
    grouping: &GroupingResult,
    roster: Option<&[String]>,
) -> Result<ErrorStats> {
    let by_id: BTreeMap<&str, _> = evaluation
        .folds
        .iter()
        .map(|f| (f.test_pitcher_id.as_str(), f))
        .collect();
    if let Some(ids) = roster {
        if let Some(missing) = ids.iter().find(|id| !by_id.contains_key(id.as_str())) {
            return Err(Error::MissingPitcher(missing.clone()));
        }
    }
    let pitchers: Vec<PitcherError> = evaluation
        .folds
        .iter()
        .map(|f| {
            let mae = f
                .predictions
                .iter()
                .zip(&f.truths)
                .map(|(p, t)| (p - t).abs())
                .sum::<f64>()
                / f.truths.len() as f64;
            PitcherError {
                pitcher_id: f.test_pitcher_id.clone(),
                level: f.level,
                group: if grouping.is_intermediate(f.level) {
                    Group::Intermediate
                } else {
                    Group::Expert
                },
                mae,
                signed: f.mean_prediction - f.mean_truth,
            }
        })
        .collect();
    let pick = |g: Group| pitchers.iter().filter(|p| p.group == g).collect::<Vec<_>>();
    Ok(ErrorStats {
        intermediate: summarize(&pick(Group::Intermediate)),
        expert: summarize(&pick(Group::Expert)),
        pitchers,
    })
}
