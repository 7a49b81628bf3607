use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const FILTER_ORDER: usize = 4;

/// Edge padding on each side for forward-backward filtering.
const PAD: usize = 3 * FILTER_ORDER;

/// Second-order section `H(z) = (b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Low-pass section with prewarped bilinear transform of
    /// `1 / (s² + s/Q + 1)`.
    fn lowpass(k: f64, q: f64) -> Self {
        let norm = 1.0 / (1.0 + k / q + k * k);
        let b0 = k * k * norm;
        Self {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm],
        }
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / (1.0 + self.a[0] + self.a[1])
    }

    /// Transposed direct form II, starting from the steady state for a
    /// constant input equal to `signal[0]`.
    fn run(&self, signal: &mut [f64]) {
        let Some(&x0) = signal.first() else { return };
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let gain = self.dc_gain();
        let mut z1 = (gain - b0) * x0;
        let mut z2 = (b2 - a2 * gain) * x0;
        for v in signal.iter_mut() {
            let x = *v;
            let y = b0 * x + z1;
            z1 = b1 * x - a1 * y + z2;
            z2 = b2 * x - a2 * y;
            *v = y;
        }
    }
}

/// Fourth-order Butterworth low-pass realized as two cascaded biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthLowpass {
    sections: [Biquad; 2],
    pub sampling_rate: f64,
    pub cutoff: f64,
}

impl ButterworthLowpass {
    pub fn design(sampling_rate: f64, cutoff: f64) -> Result<Self> {
        let nyquist = sampling_rate / 2.0;
        if !(cutoff > 0.0 && cutoff < nyquist) {
            return Err(Error::CutoffOutOfRange { cutoff, nyquist });
        }
        let k = (PI * cutoff / sampling_rate).tan();
        // Pole-pair quality factors of the 4th-order prototype.
        let q1 = 1.0 / (2.0 * (PI / 8.0).cos());
        let q2 = 1.0 / (2.0 * (3.0 * PI / 8.0).cos());
        Ok(Self {
            sections: [Biquad::lowpass(k, q1), Biquad::lowpass(k, q2)],
            sampling_rate,
            cutoff,
        })
    }

    pub fn sections(&self) -> &[Biquad; 2] {
        &self.sections
    }

    /// Single causal pass.
    pub fn filter_forward(&self, signal: &mut [f64]) {
        for s in &self.sections {
            s.run(signal);
        }
    }

    /// Zero-phase forward-backward pass with odd reflective padding.
    pub fn filtfilt(&self, signal: &[f64]) -> Result<Vec<f64>> {
        let n = signal.len();
        if n <= PAD {
            return Err(Error::SeriesTooShort {
                op: "butterworth_lowpass",
                len: n,
                min: PAD + 1,
            });
        }
        let mut ext = Vec::with_capacity(n + 2 * PAD);
        let (first, last) = (signal[0], signal[n - 1]);
        ext.extend((1..=PAD).rev().map(|i| 2.0 * first - signal[i]));
        ext.extend_from_slice(signal);
        ext.extend((1..=PAD).map(|i| 2.0 * last - signal[n - 1 - i]));

        self.filter_forward(&mut ext);
        ext.reverse();
        self.filter_forward(&mut ext);
        ext.reverse();
        Ok(ext[PAD..PAD + n].to_vec())
    }
}

/// Zero-phase 4th-order Butterworth low-pass of `signal` sampled at `fs`.
pub fn butterworth_lowpass(signal: &[f64], fs: f64, fc: f64) -> Result<Vec<f64>> {
    ButterworthLowpass::design(fs, fc)?.filtfilt(signal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_is_unchanged() {
        let x = vec![3.75; 40];
        let y = butterworth_lowpass(&x, 200.0, 6.0).unwrap();
        assert_eq!(y.len(), x.len());
        for v in y {
            assert!((v - 3.75).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_cutoff_outside_open_band() {
        for fc in [0.0, -1.0, 100.0, 150.0] {
            assert!(matches!(
                butterworth_lowpass(&[0.0; 50], 200.0, fc),
                Err(Error::CutoffOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn rejects_short_series() {
        assert!(matches!(
            butterworth_lowpass(&[1.0; 12], 200.0, 10.0),
            Err(Error::SeriesTooShort { min: 13, .. })
        ));
        assert!(butterworth_lowpass(&[1.0; 13], 200.0, 10.0).is_ok());
    }

    #[test]
    fn zero_phase_keeps_slow_sinusoid_aligned() {
        let fs = 200.0;
        let x: Vec<f64> = (0..400).map(|i| (2.0 * PI * 1.0 * i as f64 / fs).sin()).collect();
        let y = butterworth_lowpass(&x, fs, 10.0).unwrap();
        for i in 50..350 {
            assert!((x[i] - y[i]).abs() < 1e-3, "sample {i}");
        }
    }
}
