use serde::{Deserialize, Serialize};

use super::filter::butterworth_lowpass;
use crate::error::{Error, Result};

const MIN_LEN: usize = 50;
const EDGE_FRACTION: f64 = 0.1;

/// Candidate cutoffs for residual analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffGrid {
    pub min_hz: f64,
    pub max_hz: f64,
    pub step_hz: f64,
    /// Fraction of the grid (highest cutoffs) used to fit the noise line.
    pub tail_fraction: f64,
}

impl Default for CutoffGrid {
    fn default() -> Self {
        Self {
            min_hz: 5.0,
            max_hz: 25.0,
            step_hz: 0.5,
            tail_fraction: 0.25,
        }
    }
}

impl CutoffGrid {
    /// Grid values strictly below Nyquist.
    pub fn values(&self, fs: f64) -> Vec<f64> {
        let n = ((self.max_hz - self.min_hz) / self.step_hz).round() as usize;
        (0..=n)
            .map(|i| self.min_hz + i as f64 * self.step_hz)
            .filter(|&f| f < fs / 2.0)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.min_hz > 0.0
            && self.max_hz > self.min_hz
            && self.step_hz > 0.0
            && self.tail_fraction > 0.0
            && self.tail_fraction <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("cutoff grid {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSelection {
    pub cutoff_hz: f64,
    /// Residual level extrapolated from the high-frequency tail to 0 Hz.
    pub noise_floor: f64,
    /// `(cutoff, rms residual)` for every grid value.
    pub residuals: Vec<(f64, f64)>,
    /// Set when the signal is constant and the grid maximum was returned.
    pub degenerate: bool,
}

/// RMS of `raw − filtered` over the interior, skipping `EDGE_FRACTION` of the
/// samples at each end where padding transients dominate.
fn rms_residual(raw: &[f64], filtered: &[f64]) -> f64 {
    let skip = (raw.len() as f64 * EDGE_FRACTION) as usize;
    let range = skip..raw.len() - skip;
    let n = range.len() as f64;
    let ss: f64 = raw[range.clone()]
        .iter()
        .zip(&filtered[range])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    (ss / n).sqrt()
}

/// Ordinary least squares line; returns `(intercept, slope)`.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Residual analysis over `grid`: the noise floor is the 0 Hz intercept of a
/// line through the tail residuals, and the chosen cutoff is the smallest
/// one whose residual does not exceed that floor.
pub fn optimal_cutoff(signal: &[f64], fs: f64, grid: &CutoffGrid) -> Result<CutoffSelection> {
    grid.validate()?;
    if signal.len() < MIN_LEN {
        return Err(Error::SeriesTooShort {
            op: "optimal_cutoff",
            len: signal.len(),
            min: MIN_LEN,
        });
    }
    let values = grid.values(fs);
    let Some(&top) = values.last() else {
        return Err(Error::InvalidConfig(format!(
            "no grid cutoff below Nyquist ({} Hz)",
            fs / 2.0
        )));
    };

    let (lo, hi) = signal.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
        return Ok(CutoffSelection {
            cutoff_hz: top,
            noise_floor: 0.0,
            residuals: values.iter().map(|&f| (f, 0.0)).collect(),
            degenerate: true,
        });
    }

    let residuals = values
        .iter()
        .map(|&fc| Ok((fc, rms_residual(signal, &butterworth_lowpass(signal, fs, fc)?))))
        .collect::<Result<Vec<_>>>()?;

    let tail_len = ((residuals.len() as f64 * grid.tail_fraction).round() as usize).clamp(2, residuals.len());
    let (noise_floor, _) = fit_line(&residuals[residuals.len() - tail_len..]);
    let cutoff_hz = residuals
        .iter()
        .find(|(_, r)| *r <= noise_floor)
        .map_or(top, |(f, _)| *f);

    Ok(CutoffSelection {
        cutoff_hz,
        noise_floor,
        residuals,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_takes_grid_maximum() {
        let sel = optimal_cutoff(&[1.25; 120], 200.0, &CutoffGrid::default()).unwrap();
        assert!(sel.degenerate);
        assert_eq!(sel.cutoff_hz, 25.0);
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(matches!(
            optimal_cutoff(&[0.0; 49], 200.0, &CutoffGrid::default()),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn grid_is_clipped_to_nyquist() {
        let g = CutoffGrid::default();
        assert_eq!(g.values(200.0).len(), 41);
        assert_eq!(*g.values(40.0).last().unwrap(), 19.5);
    }

    #[test]
    fn line_fit_recovers_intercept() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let (a, b) = fit_line(&pts);
        assert!((a - 3.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
    }
}
