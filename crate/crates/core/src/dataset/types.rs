use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::joints::{CompetitiveLevel, Handedness};
use crate::signal::NormalizedMotion;

/// Plausible ball speeds, in mph.
pub const SPEED_BAND_MPH: (f64, f64) = (40.0, 110.0);

pub const PITCHES_PER_PITCHER: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct MotionSample {
    pub motion: NormalizedMotion,
    /// Measured initial ball speed, mph.
    pub ball_speed: f64,
    pub pitcher_id: String,
}

impl MotionSample {
    pub fn new(motion: NormalizedMotion, ball_speed: f64, pitcher_id: impl Into<String>) -> Result<Self> {
        let (lo, hi) = SPEED_BAND_MPH;
        if !(ball_speed > lo && ball_speed < hi) {
            return Err(Error::InvalidMotion(format!(
                "ball speed {ball_speed} mph outside ({lo}, {hi})"
            )));
        }
        Ok(Self {
            motion,
            ball_speed,
            pitcher_id: pitcher_id.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitcherRecord {
    pub id: String,
    pub level: CompetitiveLevel,
    pub handedness: Handedness,
    pub pitches: Vec<MotionSample>,
}

impl PitcherRecord {
    pub fn mean_speed(&self) -> f64 {
        self.pitches.iter().map(|p| p.ball_speed).sum::<f64>() / self.pitches.len() as f64
    }
}

/// An immutable set of pitchers. Pitcher order is the order of ingestion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub pitchers: Vec<PitcherRecord>,
}

impl Corpus {
    pub fn new(pitchers: Vec<PitcherRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for p in &pitchers {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicatePitcher(p.id.clone()));
            }
        }
        Ok(Self { pitchers })
    }

    pub fn len(&self) -> usize {
        self.pitchers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pitchers.is_empty()
    }

    pub fn sample_count(&self) -> usize {
        self.pitchers.iter().map(|p| p.pitches.len()).sum()
    }

    pub fn get(&self, id: &str) -> Option<&PitcherRecord> {
        self.pitchers.iter().find(|p| p.id == id)
    }

    pub fn samples(&self) -> impl Iterator<Item = &MotionSample> {
        self.pitchers.iter().flat_map(|p| p.pitches.iter())
    }

    /// Keeps the first `n` pitchers (ingestion order).
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            pitchers: self.pitchers.iter().take(n).cloned().collect(),
        }
    }
}

/// Keeps the five fastest pitches, fastest first. Ties keep the pitch that was
/// recorded earlier.
pub fn select_top5<T>(pitches: Vec<T>, speed: impl Fn(&T) -> f64) -> Result<Vec<T>> {
    if pitches.len() < PITCHES_PER_PITCHER {
        return Err(Error::TooFewPitches {
            required: PITCHES_PER_PITCHER,
            pitchers: Vec::new(),
        });
    }
    let mut indexed: Vec<(usize, T)> = pitches.into_iter().enumerate().collect();
    // stable sort: equal speeds stay in recording order
    indexed.sort_by(|a, b| speed(&b.1).total_cmp(&speed(&a.1)));
    Ok(indexed.into_iter().take(PITCHES_PER_PITCHER).map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_five_fastest_in_descending_order() {
        let speeds = vec![80.0, 81.0, 82.0, 83.0, 84.0, 85.0, 86.0];
        let kept = select_top5(speeds, |s| *s).unwrap();
        assert_eq!(kept, vec![86.0, 85.0, 84.0, 83.0, 82.0]);
    }

    #[test]
    fn exactly_five_are_all_kept() {
        let kept = select_top5(vec![3.0, 1.0, 2.0, 5.0, 4.0], |s| *s).unwrap();
        assert_eq!(kept.len(), 5);
    }

    #[test]
    fn boundary_tie_keeps_earlier_pitch() {
        let pitches = vec![(0, 90.0), (1, 88.0), (2, 87.0), (3, 86.0), (4, 85.0), (5, 85.0)];
        let kept = select_top5(pitches, |p| p.1).unwrap();
        assert_eq!(kept.last().unwrap().0, 4);
    }

    #[test]
    fn fewer_than_five_is_an_error() {
        assert!(matches!(
            select_top5(vec![1.0, 2.0], |s| *s),
            Err(Error::TooFewPitches { .. })
        ));
    }
}
