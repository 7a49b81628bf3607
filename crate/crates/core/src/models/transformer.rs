//! Stacked post-norm transformer encoder over frames.

use crossind_tensor::{init, ParamId, ParamStore, Tape, Tensor, Var};
use rand::Rng;

use super::spec::{Pooling, TransformerSpec};
use crate::error::Result;

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
struct EncoderLayer {
    wq: ParamId,
    bq: ParamId,
    wk: ParamId,
    bk: ParamId,
    wv: ParamId,
    bv: ParamId,
    wo: ParamId,
    bo: ParamId,
    ln1_g: ParamId,
    ln1_b: ParamId,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
    ln2_g: ParamId,
    ln2_b: ParamId,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TransformerNet {
    spec: TransformerSpec,
    embed_w: ParamId,
    embed_b: ParamId,
    layers: Vec<EncoderLayer>,
    head_w: ParamId,
    head_b: ParamId,
    /// `[T, d_l]`, or `None` when disabled.
    positional: Option<Tensor>,
    pooling: Pooling,
}

/// Sinusoidal encoding `[frames, d]`: sine on even columns, cosine on odd.
pub fn positional_encoding(frames: usize, d: usize) -> Tensor {
    let mut data = vec![0.0; frames * d];
    for t in 0..frames {
        for i in 0..d {
            let rate = 10000f64.powf((2 * (i / 2)) as f64 / d as f64);
            let angle = t as f64 / rate;
            data[t * d + i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    Tensor::new(vec![frames, d], data).expect("positive dims")
}

/// Closed-form parameter count for `features` inputs per frame.
pub fn transformer_param_count(spec: &TransformerSpec, features: usize) -> usize {
    let (d, f) = (spec.d_l, spec.d_f);
    let embed = features * d + d;
    let attention = 4 * (d * d + d);
    let ffn = d * f + f + f * d + d;
    let norms = 4 * d;
    embed + spec.layers * (attention + ffn + norms) + d + 1
}

impl TransformerNet {
    pub(crate) fn build(
        spec: TransformerSpec,
        features: usize,
        frames: usize,
        positional: bool,
        pooling: Pooling,
        store: &mut ParamStore,
        rng: &mut impl Rng,
    ) -> Self {
        let (d, f) = (spec.d_l, spec.d_f);
        let mut dense = |store: &mut ParamStore, name: &str, fan_in: usize, fan_out: usize| {
            let w = store.add(format!("{name}.weight"), init::xavier_uniform(rng, fan_in, fan_out));
            let b = store.add(format!("{name}.bias"), init::zeros(fan_out));
            (w, b)
        };
        let (embed_w, embed_b) = dense(store, "embed", features, d);
        let mut layers = Vec::with_capacity(spec.layers);
        for l in 0..spec.layers {
            let (wq, bq) = dense(store, &format!("enc{l}.attn.q"), d, d);
            let (wk, bk) = dense(store, &format!("enc{l}.attn.k"), d, d);
            let (wv, bv) = dense(store, &format!("enc{l}.attn.v"), d, d);
            let (wo, bo) = dense(store, &format!("enc{l}.attn.out"), d, d);
            let ln1_g = store.add(format!("enc{l}.norm1.gamma"), init::ones(d));
            let ln1_b = store.add(format!("enc{l}.norm1.beta"), init::zeros(d));
            let (w1, b1) = dense(store, &format!("enc{l}.ffn.in"), d, f);
            let (w2, b2) = dense(store, &format!("enc{l}.ffn.out"), f, d);
            let ln2_g = store.add(format!("enc{l}.norm2.gamma"), init::ones(d));
            let ln2_b = store.add(format!("enc{l}.norm2.beta"), init::zeros(d));
            layers.push(EncoderLayer {
                wq,
                bq,
                wk,
                bk,
                wv,
                bv,
                wo,
                bo,
                ln1_g,
                ln1_b,
                w1,
                b1,
                w2,
                b2,
                ln2_g,
                ln2_b,
            });
        }
        let (head_w, head_b) = dense(store, "head", d, 1);
        Self {
            spec,
            embed_w,
            embed_b,
            layers,
            head_w,
            head_b,
            positional: positional.then(|| positional_encoding(frames, d)),
            pooling,
        }
    }

    fn dense(tape: &mut Tape, p: &[Var], x: Var, w: ParamId, b: ParamId) -> Result<Var> {
        let y = tape.matmul(x, p[w.0])?;
        Ok(tape.add_broadcast(y, p[b.0])?)
    }

    /// `[B, T, d] → [B·H, T, d/H]`
    fn split_heads(&self, tape: &mut Tape, x: Var, b: usize, t: usize) -> Result<Var> {
        let h = self.spec.heads;
        let dh = self.spec.d_l / h;
        if h == 1 {
            return Ok(x);
        }
        let x = tape.reshape(x, &[b, t, h, dh])?;
        let x = tape.transpose(x, 1, 2)?;
        Ok(tape.reshape(x, &[b * h, t, dh])?)
    }

    fn merge_heads(&self, tape: &mut Tape, x: Var, b: usize, t: usize) -> Result<Var> {
        let h = self.spec.heads;
        let dh = self.spec.d_l / h;
        if h == 1 {
            return Ok(x);
        }
        let x = tape.reshape(x, &[b, h, t, dh])?;
        let x = tape.transpose(x, 1, 2)?;
        Ok(tape.reshape(x, &[b, t, h * dh])?)
    }

    /// `x [B, T, F] → [B]`. Attention probabilities `[B·H, T, T]` are pushed
    /// to `capture` when given.
    pub(crate) fn forward(
        &self,
        tape: &mut Tape,
        p: &[Var],
        x: Var,
        mut capture: Option<&mut Vec<Var>>,
    ) -> Result<Var> {
        let (b, t) = (tape.shape(x)[0], tape.shape(x)[1]);
        let d = self.spec.d_l;
        let dh = d / self.spec.heads;
        let mut h = Self::dense(tape, p, x, self.embed_w, self.embed_b)?;
        if let Some(pe) = &self.positional {
            let pe = tape.constant(pe.clone());
            h = tape.add_broadcast(h, pe)?;
        }
        let h_rows = |tape: &mut Tape, v: Var| tape.reshape(v, &[b, t, d]);
        for layer in &self.layers {
            let q = Self::dense(tape, p, h, layer.wq, layer.bq)?;
            let k = Self::dense(tape, p, h, layer.wk, layer.bk)?;
            let v = Self::dense(tape, p, h, layer.wv, layer.bv)?;
            let (q, k, v) = (
                self.split_heads(tape, q, b, t)?,
                self.split_heads(tape, k, b, t)?,
                self.split_heads(tape, v, b, t)?,
            );
            let scores = tape.bmm_nt(q, k)?;
            let scores = tape.scale(scores, 1.0 / (dh as f64).sqrt())?;
            let probs = tape.softmax(scores)?;
            if let Some(c) = capture.as_deref_mut() {
                c.push(probs);
            }
            let ctx = tape.bmm(probs, v)?;
            let ctx = self.merge_heads(tape, ctx, b, t)?;
            let ctx = h_rows(tape, ctx)?;
            let attn = Self::dense(tape, p, ctx, layer.wo, layer.bo)?;
            let res = tape.add(h, attn)?;
            h = tape.layer_norm(res, p[layer.ln1_g.0], p[layer.ln1_b.0], LN_EPS)?;

            let f = Self::dense(tape, p, h, layer.w1, layer.b1)?;
            let f = tape.relu(f)?;
            let f = Self::dense(tape, p, f, layer.w2, layer.b2)?;
            let res = tape.add(h, f)?;
            h = tape.layer_norm(res, p[layer.ln2_g.0], p[layer.ln2_b.0], LN_EPS)?;
        }
        let pooled = match self.pooling {
            Pooling::Mean => tape.mean_axis(h, 1)?,
            Pooling::LastFrame => {
                let last = tape.slice(h, 1, t - 1, 1)?;
                tape.reshape(last, &[b, d])?
            }
        };
        let y = Self::dense(tape, p, pooled, self.head_w, self.head_b)?;
        Ok(tape.reshape(y, &[b])?)
    }
}
