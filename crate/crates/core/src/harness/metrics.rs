use crate::error::{Error, Result};

/// Coefficient of determination `1 − Σ(ŷ−y)² / Σ(y−ȳ)²`.
pub fn r_squared(truths: &[f64], predictions: &[f64]) -> Result<f64> {
    if truths.is_empty() || truths.len() != predictions.len() {
        return Err(Error::InvalidConfig(format!(
            "r_squared needs equal nonempty lengths, got {} and {}",
            truths.len(),
            predictions.len()
        )));
    }
    let mean = truths.iter().sum::<f64>() / truths.len() as f64;
    let ss_tot: f64 = truths.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateTruths);
    }
    let ss_res: f64 = truths.iter().zip(predictions).map(|(y, p)| (p - y).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (`n − 1`); zero for fewer than two values.
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}
