//! Candidate regressors mapping a restricted motion `[T, J, 3]` to one speed.

pub mod checkpoint;
mod gnn_gru;
pub mod graph;
mod spec;
mod transformer;

use crossind_tensor::gradcheck::{numeric_gradients, GradCheck};
use crossind_tensor::{ParamStore, Tape, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use gnn_gru::gnn_gru_param_count;
pub use graph::{Normalization, SkeletonGraph};
pub use spec::{GnnGruSpec, ModelOptions, ModelSpec, Pooling, TransformerSpec, ENCODER_LAYERS};
pub use transformer::{positional_encoding, transformer_param_count};

use crate::error::{Error, Result};
use crate::joints::JointId;
use gnn_gru::GnnGruNet;
use transformer::TransformerNet;

#[derive(Debug, Clone, PartialEq)]
enum Net {
    Transformer(TransformerNet),
    GnnGru(GnnGruNet),
}

/// A model plus its parameters for one input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    spec: ModelSpec,
    joints: Vec<JointId>,
    frames: usize,
    params: ParamStore,
    net: Net,
}

impl Regressor {
    pub fn build(
        spec: ModelSpec,
        joints: &[JointId],
        frames: usize,
        options: &ModelOptions,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        spec.validate()?;
        if joints.is_empty() {
            return Err(Error::EmptySubgraph);
        }
        if frames == 0 {
            return Err(Error::InvalidConfig("model needs at least one frame".into()));
        }
        let mut params = ParamStore::new();
        let net = match spec {
            ModelSpec::Transformer(s) => Net::Transformer(TransformerNet::build(
                s,
                3 * joints.len(),
                frames,
                options.positional_encoding,
                options.pooling,
                &mut params,
                rng,
            )),
            ModelSpec::GnnGru(s) => {
                let prop = options.graph.propagation(joints, options.normalization)?;
                Net::GnnGru(GnnGruNet::build(
                    s,
                    prop,
                    joints.len(),
                    options.gates_open,
                    &mut params,
                    rng,
                ))
            }
        };
        Ok(Self {
            spec,
            joints: joints.to_vec(),
            frames,
            params,
            net,
        })
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn joints(&self) -> &[JointId] {
        &self.joints
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.scalar_count()
    }

    /// Closed-form parameter count of `spec` for `joints` inputs.
    pub fn expected_parameter_count(spec: &ModelSpec, joints: usize) -> usize {
        match spec {
            ModelSpec::Transformer(s) => transformer_param_count(s, 3 * joints),
            ModelSpec::GnnGru(s) => gnn_gru_param_count(s, joints),
        }
    }

    /// Replaces the parameters with a store of identical names and shapes.
    pub fn load_params(&mut self, store: ParamStore) -> Result<()> {
        let same = store.len() == self.params.len()
            && store
                .iter()
                .zip(self.params.iter())
                .all(|(a, b)| a.name == b.name && a.value.shape() == b.value.shape());
        if !same {
            return Err(Error::InvalidConfig(format!("checkpoint does not match {}", self.spec)));
        }
        self.params = store;
        Ok(())
    }

    /// Leaves for every parameter; `trainable` decides whether they collect
    /// gradients.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        self.params
            .iter()
            .map(|p| {
                if trainable {
                    tape.param(p.value.clone())
                } else {
                    tape.constant(p.value.clone())
                }
            })
            .collect()
    }

    fn check_input(&self, shape: &[usize]) -> Result<()> {
        let ok = shape.len() == 4 && shape[1] == self.frames && shape[2] == self.joints.len() && shape[3] == 3;
        if ok {
            Ok(())
        } else {
            Err(Error::InputDims {
                expected: vec![0, self.frames, self.joints.len(), 3],
                got: shape.to_vec(),
            })
        }
    }

    /// `input [B, T, J, 3] → [B]` on `tape`, with parameters from [`bind`](Self::bind).
    pub fn forward(&self, tape: &mut Tape, bound: &[Var], input: Var) -> Result<Var> {
        self.forward_inner(tape, bound, input, None)
    }

    fn forward_inner(&self, tape: &mut Tape, bound: &[Var], input: Var, capture: Option<&mut Vec<Var>>) -> Result<Var> {
        let shape = tape.shape(input).to_vec();
        self.check_input(&shape)?;
        match &self.net {
            Net::Transformer(net) => {
                let flat = tape.reshape(input, &[shape[0], shape[1], 3 * shape[2]])?;
                net.forward(tape, bound, flat, capture)
            }
            Net::GnnGru(net) => net.forward(tape, bound, input),
        }
    }

    /// Predictions for a batch without recording gradients.
    pub fn predict(&self, input: &Tensor) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false);
        let x = tape.constant(input.clone());
        let y = self.forward(&mut tape, &bound, x)?;
        Ok(tape.value(y).data().to_vec())
    }

    /// Attention probabilities `[B·H, T, T]` of each encoder layer; empty
    /// for the recurrent family.
    pub fn attention_weights(&self, input: &Tensor) -> Result<Vec<Tensor>> {
        if !matches!(self.net, Net::Transformer(_)) {
            return Ok(Vec::new());
        }
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false);
        let x = tape.constant(input.clone());
        let mut captured = Vec::new();
        self.forward_inner(&mut tape, &bound, x, Some(&mut captured))?;
        Ok(captured.into_iter().map(|v| tape.value(v).clone()).collect())
    }

    /// Central-difference check of the MSE gradient for every parameter on a
    /// random batch of three.
    pub fn gradient_check(&self, seed: u64) -> Result<GradCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // zero-initialized biases would put ReLU inputs exactly on the kink
        let mut model = self.clone();
        for p in model.params.iter_mut() {
            p.value
                .data_mut()
                .iter_mut()
                .for_each(|v| *v += rng.random_range(-0.3..0.3));
        }
        let shape = vec![3, self.frames, self.joints.len(), 3];
        let n = shape.iter().product();
        let x = Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let target: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |tape: &mut Tape, bound: &[Var]| -> Result<Var> {
            let input = tape.constant(x.clone());
            let y = model.forward(tape, bound, input)?;
            let goal = tape.constant(Tensor::vector(&target));
            Ok(tape.mse_loss(y, goal)?)
        };

        let mut tape = Tape::new();
        let bound = model.bind(&mut tape, true);
        let l = loss(&mut tape, &bound)?;
        tape.backward(l)?;
        let analytic: Vec<Vec<f64>> = bound.iter().map(|v| tape.grad_or_zeros(*v)).collect();

        let values: Vec<Tensor> = model.params.iter().map(|p| p.value.clone()).collect();
        let mut failure = None;
        let numeric = numeric_gradients(&values, |vs| {
            let mut tape = Tape::new();
            let bound: Vec<Var> = vs.iter().map(|v| tape.constant(v.clone())).collect();
            match loss(&mut tape, &bound) {
                Ok(l) => tape.value(l).data()[0],
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let mut check = GradCheck::compare(self.spec.to_string(), &analytic, &numeric);
        if let Some(k) = check
            .worst
            .strip_prefix("input ")
            .and_then(|w| w.split(' ').next()?.parse::<usize>().ok())
        {
            check.worst = format!(
                "{}: {}",
                model.params.iter().nth(k).map_or("", |p| p.name.as_str()),
                check.worst
            );
        }
        Ok(check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_input(rng: &mut ChaCha8Rng, b: usize, t: usize, j: usize) -> Tensor {
        let data = (0..b * t * j * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        Tensor::new(vec![b, t, j, 3], data).unwrap()
    }

    #[test]
    fn parameter_counts_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for spec in ModelSpec::grid() {
            for joints in [&JointId::ALL[..], &JointId::ALL[..3], &JointId::ALL[..1]] {
                let m = Regressor::build(spec, joints, 10, &ModelOptions::default(), &mut rng).unwrap();
                assert_eq!(
                    m.parameter_count(),
                    Regressor::expected_parameter_count(&spec, joints.len()),
                    "{spec}"
                );
            }
        }
    }

    #[test]
    fn full_input_shapes_propagate_to_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_input(&mut rng, 2, 101, 15);
        for spec in ["transformer:4,64,128", "gnn_gru:2,64"] {
            let m = Regressor::build(
                spec.parse().unwrap(),
                &JointId::ALL,
                101,
                &ModelOptions::default(),
                &mut rng,
            )
            .unwrap();
            let y = m.predict(&x).unwrap();
            assert_eq!(y.len(), 2);
            assert!(y.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Regressor::build(
            "transformer:2,32,64".parse().unwrap(),
            &JointId::ALL[..4],
            12,
            &ModelOptions::default(),
            &mut rng,
        )
        .unwrap();
        let att = m.attention_weights(&random_input(&mut rng, 3, 12, 4)).unwrap();
        assert_eq!(att.len(), ENCODER_LAYERS);
        for a in att {
            assert_eq!(a.shape(), &[6, 12, 12]);
            for row in a.data().chunks(12) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_input_dims_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Regressor::build(
            "gnn_gru:2,32".parse().unwrap(),
            &JointId::ALL[..4],
            10,
            &ModelOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            m.predict(&random_input(&mut rng, 1, 9, 4)),
            Err(Error::InputDims { .. })
        ));
    }

    #[test]
    fn checkpoint_restores_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec: ModelSpec = "transformer:2,32,64".parse().unwrap();
        let a = Regressor::build(spec, &JointId::ALL[..3], 5, &ModelOptions::default(), &mut rng).unwrap();
        let mut b = Regressor::build(spec, &JointId::ALL[..3], 5, &ModelOptions::default(), &mut rng).unwrap();
        let x = random_input(&mut rng, 2, 5, 3);
        assert_ne!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
        b.load_params(checkpoint::decode(&checkpoint::encode(a.params())).unwrap())
            .unwrap();
        assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
    }
}
