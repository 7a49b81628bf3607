//! Frequency-domain and Monte-Carlo checks for the low-pass filter and the
//! residual-analysis cutoff selection.

use std::f64::consts::PI;

use crossind_core::signal::{butterworth_lowpass, optimal_cutoff, ButterworthLowpass, CutoffGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// |H(e^{jω})| of a cascade of biquads, evaluated directly from coefficients.
fn magnitude(filter: &ButterworthLowpass, f: f64) -> f64 {
    let w = 2.0 * PI * f / filter.sampling_rate;
    filter
        .sections()
        .iter()
        .map(|s| {
            let (c1, s1) = (w.cos(), -w.sin());
            let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
            let num_re = s.b[0] + s.b[1] * c1 + s.b[2] * c2;
            let num_im = s.b[1] * s1 + s.b[2] * s2;
            let den_re = 1.0 + s.a[0] * c1 + s.a[1] * c2;
            let den_im = s.a[0] * s1 + s.a[1] * s2;
            (num_re.hypot(num_im)) / (den_re.hypot(den_im))
        })
        .product()
}

#[test]
fn single_pass_gain_at_cutoff_is_half_power() {
    for (fs, fc) in [(200.0, 6.0), (200.0, 25.0), (500.0, 12.0), (250.0, 60.0)] {
        let f = ButterworthLowpass::design(fs, fc).unwrap();
        let m = magnitude(&f, fc);
        assert!(
            (m - 1.0 / 2f64.sqrt()).abs() <= 0.01 / 2f64.sqrt(),
            "fs={fs} fc={fc}: |H|={m}"
        );
        assert!((magnitude(&f, 0.0) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn stop_band_sinusoid_is_attenuated_by_40_db() {
    let fs = 200.0;
    let x: Vec<f64> = (0..1000).map(|i| (2.0 * PI * 0.45 * i as f64).sin()).collect();
    let y = butterworth_lowpass(&x, fs, 0.05 * fs).unwrap();
    let interior = 100..900;
    let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
    let ratio = rms(&y[interior.clone()]) / rms(&x[interior]);
    let db = -20.0 * ratio.log10();
    assert!(db > 40.0, "attenuation {db} dB");
}

#[test]
fn filtering_preserves_length_and_constant_mean() {
    let x = vec![-0.731; 77];
    let y = butterworth_lowpass(&x, 300.0, 14.0).unwrap();
    assert_eq!(y.len(), 77);
    let mean = y.iter().sum::<f64>() / 77.0;
    assert!((mean + 0.731).abs() < 1e-12);
}

#[test]
fn cutoff_for_noisy_slow_sinusoid_lands_in_band() {
    let fs = 200.0;
    let noise = Normal::new(0.0, 0.02).unwrap();
    let grid = CutoffGrid::default();
    let mut misses = Vec::new();
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..400)
            .map(|i| (2.0 * PI * 2.0 * i as f64 / fs).sin() + noise.sample(&mut rng))
            .collect();
        let sel = optimal_cutoff(&x, fs, &grid).unwrap();
        assert!(!sel.degenerate);
        if !(3.0..=15.0).contains(&sel.cutoff_hz) {
            misses.push((seed, sel.cutoff_hz));
        }
    }
    assert!(misses.is_empty(), "out-of-band selections: {misses:?}");
}

#[test]
fn cutoff_is_monotone_in_signal_bandwidth() {
    let fs = 200.0;
    let grid = CutoffGrid::default();
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps: Vec<f64> = (0..600).map(|_| noise.sample(&mut rng)).collect();
    let mut previous = 0.0;
    for scale in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let tones = [1.0 * scale, 2.0 * scale, 3.0 * scale];
        let x: Vec<f64> = (0..600)
            .map(|i| {
                let t = i as f64 / fs;
                tones.iter().map(|f| (2.0 * PI * f * t).sin() / 3.0).sum::<f64>() + eps[i]
            })
            .collect();
        let fc = optimal_cutoff(&x, fs, &grid).unwrap().cutoff_hz;
        assert!(fc >= previous, "scale {scale}: {fc} < {previous}");
        previous = fc;
    }
}
