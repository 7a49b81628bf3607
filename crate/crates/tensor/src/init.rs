//! Parameter initializers.

use rand::Rng;

use crate::tensor::Tensor;

/// Glorot/Xavier uniform: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn xavier_uniform<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Tensor::new(vec![fan_in, fan_out], data).expect("fan sizes must be positive")
}

pub fn zeros(len: usize) -> Tensor {
    Tensor::zeros(&[len])
}

pub fn ones(len: usize) -> Tensor {
    Tensor::ones(&[len])
}
