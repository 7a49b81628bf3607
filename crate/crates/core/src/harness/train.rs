//! Minibatch Adam on MSE with fold-local standardization and early stopping.

use crossind_tensor::{Adam, AdamConfig, Tape, Tensor};
use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{r_squared, sample_sd};
use crate::dataset::RestrictedSample;
use crate::error::{Error, Result};
use crate::models::Regressor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputStandardization {
    /// z-score every joint coordinate over all training frames.
    #[default]
    PerChannel,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Training stops once train-set R² exceeds this.
    pub early_stop_r2: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub input_standardization: InputStandardization,
    pub standardize_target: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            weight_decay: 1e-4,
            max_epochs: 50,
            early_stop_r2: 0.90,
            batch_size: 32,
            seed: 0,
            input_standardization: InputStandardization::PerChannel,
            standardize_target: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(self.early_stop_r2 > 0.0 && self.early_stop_r2 <= 1.0) {
            return bad(format!("early-stop R² {} outside (0, 1]", self.early_stop_r2));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return bad("max_epochs and batch_size must be at least 1".into());
        }
        if !(self.weight_decay >= 0.0) {
            return bad(format!("weight decay {} must be non-negative", self.weight_decay));
        }
        Ok(())
    }
}

/// Per-channel affine standardization fitted on training inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelScaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl ChannelScaler {
    /// Channels are the `J·3` coordinates; statistics pool every frame of
    /// every sample.
    pub fn fit(samples: &[&RestrictedSample], mode: InputStandardization) -> Self {
        let channels = samples[0].joints.len() * 3;
        if mode == InputStandardization::None {
            return Self {
                mean: vec![0.0; channels],
                sd: vec![1.0; channels],
            };
        }
        let mut sum = vec![0.0; channels];
        let mut count = 0usize;
        for s in samples {
            for row in s.data.chunks_exact(channels) {
                for (a, v) in sum.iter_mut().zip(row) {
                    *a += v;
                }
                count += 1;
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        let mut ss = vec![0.0; channels];
        for s in samples {
            for row in s.data.chunks_exact(channels) {
                for ((a, v), m) in ss.iter_mut().zip(row).zip(&mean) {
                    *a += (v - m).powi(2);
                }
            }
        }
        let sd = ss
            .iter()
            .map(|s| {
                let sd = (s / count as f64).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, sd }
    }

    /// Stacks samples into a `[B, T, J, 3]` standardized tensor.
    pub fn batch(&self, samples: &[&RestrictedSample]) -> Result<Tensor> {
        let (t, j) = samples[0].dims();
        let channels = j * 3;
        let mut data = Vec::with_capacity(samples.len() * t * channels);
        for s in samples {
            if s.dims() != (t, j) {
                return Err(Error::InputDims {
                    expected: vec![t, j, 3],
                    got: vec![s.frames, s.joints.len(), 3],
                });
            }
            for row in s.data.chunks_exact(channels) {
                data.extend(
                    row.iter()
                        .zip(&self.mean)
                        .zip(&self.sd)
                        .map(|((v, m), sd)| (v - m) / sd),
                );
            }
        }
        Ok(Tensor::new(vec![samples.len(), t, j, 3], data)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub sd: f64,
}

impl TargetScaler {
    pub fn fit(targets: &[f64], enabled: bool) -> Self {
        if !enabled {
            return Self { mean: 0.0, sd: 1.0 };
        }
        let mean = targets.iter().sum::<f64>() / targets.len() as f64;
        let sd = sample_sd(targets);
        Self {
            mean,
            sd: if sd > 1e-12 { sd } else { 1.0 },
        }
    }

    pub fn forward(&self, y: f64) -> f64 {
        (y - self.mean) / self.sd
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.sd + self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean minibatch loss on standardized targets.
    pub loss: f64,
    /// Train-set R² on de-standardized predictions.
    pub train_r2: f64,
}

/// A fitted model with the standardization it was trained under.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: Regressor,
    pub inputs: ChannelScaler,
    pub target: TargetScaler,
    pub history: Vec<EpochRecord>,
}

const PREDICT_CHUNK: usize = 64;

impl TrainedModel {
    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }

    pub fn final_train_r2(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.train_r2)
    }

    /// Predictions in mph.
    pub fn predict(&self, samples: &[&RestrictedSample]) -> Result<Vec<f64>> {
        predict_with(&self.model, &self.inputs, &self.target, samples)
    }
}

fn predict_with(
    model: &Regressor,
    inputs: &ChannelScaler,
    target: &TargetScaler,
    samples: &[&RestrictedSample],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(PREDICT_CHUNK) {
        let z = model.predict(&inputs.batch(chunk)?)?;
        out.extend(z.into_iter().map(|v| target.inverse(v)));
    }
    Ok(out)
}

/// Train-set R², with an undefined value (constant targets) reported as 0.
fn early_stop_r2(truths: &[f64], predictions: &[f64]) -> Result<f64> {
    match r_squared(truths, predictions) {
        Err(Error::DegenerateTruths) => {
            warn!("training targets are constant; R² taken as 0");
            Ok(0.0)
        }
        other => other,
    }
}

/// Fits `model` to `samples`.
pub fn train(mut model: Regressor, samples: &[&RestrictedSample], config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidConfig("empty training set".into()));
    }
    let inputs = ChannelScaler::fit(samples, config.input_standardization);
    let truths: Vec<f64> = samples.iter().map(|s| s.ball_speed).collect();
    let target = TargetScaler::fit(&truths, config.standardize_target);
    let scaled: Vec<f64> = truths.iter().map(|&y| target.forward(y)).collect();

    let mut adam = Adam::new(
        AdamConfig {
            learning_rate: config.learning_rate,
            weight_decay: config.weight_decay,
            ..AdamConfig::default()
        },
        model.params(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(config.max_epochs);

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for (bi, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&RestrictedSample> = chunk.iter().map(|&i| samples[i]).collect();
            let x = inputs.batch(&batch)?;
            let y = Tensor::vector(&chunk.iter().map(|&i| scaled[i]).collect::<Vec<_>>());
            let mut tape = Tape::new();
            let bound = model.bind(&mut tape, true);
            let xv = tape.constant(x);
            let yv = tape.constant(y);
            let pred = model.forward(&mut tape, &bound, xv)?;
            let loss = tape.mse_loss(pred, yv)?;
            let loss_value = tape.value(loss).data()[0];
            if !loss_value.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: bi,
                    loss: loss_value,
                });
            }
            tape.backward(loss)?;
            let grads: Vec<Vec<f64>> = bound.iter().map(|&v| tape.grad_or_zeros(v)).collect();
            adam.step(model.params_mut(), &grads)?;
            loss_sum += loss_value;
            batches += 1;
        }
        let predictions = predict_with(&model, &inputs, &target, samples)?;
        let train_r2 = early_stop_r2(&truths, &predictions)?;
        history.push(EpochRecord {
            epoch,
            loss: loss_sum / batches as f64,
            train_r2,
        });
        if train_r2 > config.early_stop_r2 {
            break;
        }
    }
    Ok(TrainedModel {
        model,
        inputs,
        target,
        history,
    })
}
