//! Expertise grouping by maximal separation of pitcher mean speeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{mean, sample_sd};
use crate::joints::CompetitiveLevel;

/// `|mean_a − mean_b| / (sd_a + sd_b)` from summary statistics.
pub fn eta_from_stats(mean_a: f64, sd_a: f64, mean_b: f64, sd_b: f64) -> Result<f64> {
    let spread = sd_a + sd_b;
    if !(spread > 0.0) {
        return Err(Error::Statistics("eta undefined: both groups have zero spread".into()));
    }
    Ok((mean_a - mean_b).abs() / spread)
}

/// Separation of two groups of speeds, using sample SDs.
pub fn eta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Statistics(format!(
            "eta needs at least 2 pitchers per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    eta_from_stats(mean(a), sample_sd(a), mean(b), sample_sd(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingResult {
    pub intermediate: Vec<CompetitiveLevel>,
    pub expert: Vec<CompetitiveLevel>,
    pub n_intermediate: usize,
    pub n_expert: usize,
    /// Absolute mean-speed difference, mph.
    pub d_ie: f64,
    pub sigma_i: f64,
    pub sigma_e: f64,
    /// `None` when a side has fewer than two pitchers.
    pub eta: Option<f64>,
}

impl GroupingResult {
    pub fn is_intermediate(&self, level: CompetitiveLevel) -> bool {
        self.intermediate.contains(&level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingSearch {
    pub best: GroupingResult,
    /// Every candidate in enumeration order.
    pub candidates: Vec<GroupingResult>,
}

/// The 15 candidate intermediate sets: every single level, then every pair.
pub fn candidate_sets() -> Vec<Vec<CompetitiveLevel>> {
    let all = CompetitiveLevel::ALL;
    let mut out: Vec<Vec<CompetitiveLevel>> = all.iter().map(|&l| vec![l]).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            out.push(vec![all[i], all[j]]);
        }
    }
    out
}

fn evaluate(intermediate: Vec<CompetitiveLevel>, pitchers: &[(CompetitiveLevel, f64)]) -> GroupingResult {
    let expert: Vec<CompetitiveLevel> = CompetitiveLevel::ALL
        .into_iter()
        .filter(|l| !intermediate.contains(l))
        .collect();
    let (a, b): (Vec<_>, Vec<_>) = pitchers.iter().partition(|(l, _)| intermediate.contains(l));
    let a: Vec<f64> = a.into_iter().map(|&(_, s)| s).collect();
    let b: Vec<f64> = b.into_iter().map(|&(_, s)| s).collect();
    GroupingResult {
        n_intermediate: a.len(),
        n_expert: b.len(),
        d_ie: if a.is_empty() || b.is_empty() {
            0.0
        } else {
            (mean(&a) - mean(&b)).abs()
        },
        sigma_i: sample_sd(&a),
        sigma_e: sample_sd(&b),
        eta: eta(&a, &b).ok(),
        intermediate,
        expert,
    }
}

/// Picks the intermediate set maximizing eta over `(level, mean speed)` per
/// pitcher. Candidates with a side under two pitchers are skipped; ties go
/// to the earlier candidate.
pub fn search_grouping(pitchers: &[(CompetitiveLevel, f64)]) -> Result<GroupingSearch> {
    for level in CompetitiveLevel::ALL {
        if !pitchers.iter().any(|(l, _)| *l == level) {
            return Err(Error::MissingLevel(level.to_string()));
        }
    }
    let candidates: Vec<GroupingResult> = candidate_sets().into_iter().map(|s| evaluate(s, pitchers)).collect();
    let mut best: Option<&GroupingResult> = None;
    for c in &candidates {
        if let Some(e) = c.eta {
            if best.is_none_or(|b| e > b.eta.unwrap_or(f64::NEG_INFINITY)) {
                best = Some(c);
            }
        }
    }
    let best = best
        .ok_or_else(|| Error::Statistics("no candidate grouping has two pitchers on each side".into()))?
        .clone();
    Ok(GroupingSearch { best, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_group_statistics() {
        let e = eta_from_stats(84.54, 4.39, 77.60, 4.41).unwrap();
        assert!((e - 0.789).abs() < 1e-3, "{e}");
    }

    #[test]
    fn hand_fixtures() {
        assert!((eta(&[0.0, 2.0], &[10.0, 12.0]).unwrap() - 10.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(eta(&[1.0, 3.0], &[0.0, 4.0]).unwrap(), 0.0);
        assert!(eta(&[1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn fifteen_distinct_candidates() {
        let c = candidate_sets();
        assert_eq!(c.len(), 15);
        let mut keys: Vec<Vec<usize>> = c.iter().map(|s| s.iter().map(|l| l.index()).collect()).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 15);
    }

    #[test]
    fn missing_level_is_reported() {
        let p = [
            (CompetitiveLevel::HighSchool, 80.0),
            (CompetitiveLevel::Collegiate, 82.0),
        ];
        assert!(matches!(search_grouping(&p), Err(Error::MissingLevel(_))));
    }
}
