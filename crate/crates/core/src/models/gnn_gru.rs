//! Per-frame graph convolution over the skeleton, then a GRU over frames.

use crossind_tensor::{init, ParamId, ParamStore, Tape, Tensor, Var};
use rand::Rng;

use super::spec::GnnGruSpec;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GnnGruNet {
    spec: GnnGruSpec,
    joints: usize,
    /// `[J, J]` normalized propagation matrix.
    propagation: Tensor,
    gcn: Vec<(ParamId, ParamId)>,
    w_ih: ParamId,
    b_ih: ParamId,
    w_hh: ParamId,
    b_hh: ParamId,
    head_w: ParamId,
    head_b: ParamId,
    gates_open: bool,
}

pub fn gnn_gru_param_count(spec: &GnnGruSpec, joints: usize) -> usize {
    let h = spec.hidden_units;
    let gcn = (3 * h + h) + (spec.gnn_layers - 1) * (h * h + h);
    let gru = joints * h * 3 * h + 3 * h + h * 3 * h + 3 * h;
    gcn + gru + h + 1
}

impl GnnGruNet {
    pub(crate) fn build(
        spec: GnnGruSpec,
        propagation: Vec<f64>,
        joints: usize,
        gates_open: bool,
        store: &mut ParamStore,
        rng: &mut impl Rng,
    ) -> Self {
        let h = spec.hidden_units;
        let mut gcn = Vec::with_capacity(spec.gnn_layers);
        for l in 0..spec.gnn_layers {
            let fan_in = if l == 0 { 3 } else { h };
            let w = store.add(format!("gcn{l}.weight"), init::xavier_uniform(rng, fan_in, h));
            let b = store.add(format!("gcn{l}.bias"), init::zeros(h));
            gcn.push((w, b));
        }
        // Gate blocks in [reset | update | candidate] order.
        let w_ih = store.add("gru.w_ih", init::xavier_uniform(rng, joints * h, 3 * h));
        let b_ih = store.add("gru.b_ih", init::zeros(3 * h));
        let w_hh = store.add("gru.w_hh", init::xavier_uniform(rng, h, 3 * h));
        let b_hh = store.add("gru.b_hh", init::zeros(3 * h));
        let head_w = store.add("head.weight", init::xavier_uniform(rng, h, 1));
        let head_b = store.add("head.bias", init::zeros(1));
        Self {
            spec,
            joints,
            propagation: Tensor::new(vec![joints, joints], propagation).expect("square matrix"),
            gcn,
            w_ih,
            b_ih,
            w_hh,
            b_hh,
            head_w,
            head_b,
            gates_open,
        }
    }

    /// `x [B, T, J, 3] → [B]`.
    pub(crate) fn forward(&self, tape: &mut Tape, p: &[Var], x: Var) -> Result<Var> {
        let (b, t) = (tape.shape(x)[0], tape.shape(x)[1]);
        let hid = self.spec.hidden_units;
        let a = tape.constant(self.propagation.clone());

        let mut h = x;
        for &(w, bias) in &self.gcn {
            let mixed = tape.left_matmul(a, h)?;
            let z = tape.matmul(mixed, p[w.0])?;
            let z = tape.add_broadcast(z, p[bias.0])?;
            h = tape.relu(z)?;
        }
        let seq = tape.reshape(h, &[b, t, self.joints * hid])?;
        let gx = tape.matmul(seq, p[self.w_ih.0])?;
        let gx = tape.add_broadcast(gx, p[self.b_ih.0])?;

        let mut state = tape.constant(Tensor::zeros(&[b, hid]));
        for step in 0..t {
            let xt = tape.slice(gx, 1, step, 1)?;
            let xt = tape.reshape(xt, &[b, 3 * hid])?;
            let gh = tape.matmul(state, p[self.w_hh.0])?;
            let gh = tape.add_broadcast(gh, p[self.b_hh.0])?;
            let x_n = tape.slice(xt, 1, 2 * hid, hid)?;
            let h_n = tape.slice(gh, 1, 2 * hid, hid)?;
            if self.gates_open {
                let pre = tape.add(x_n, h_n)?;
                state = tape.tanh(pre)?;
                continue;
            }
            let x_rz = tape.slice(xt, 1, 0, 2 * hid)?;
            let h_rz = tape.slice(gh, 1, 0, 2 * hid)?;
            let rz = tape.add(x_rz, h_rz)?;
            let rz = tape.sigmoid(rz)?;
            let r = tape.slice(rz, 1, 0, hid)?;
            let z = tape.slice(rz, 1, hid, hid)?;
            let gated = tape.mul(r, h_n)?;
            let pre = tape.add(x_n, gated)?;
            let n = tape.tanh(pre)?;
            // h' = (1 − z)·n + z·h = n + z·(h − n)
            let diff = tape.sub(state, n)?;
            let keep = tape.mul(z, diff)?;
            state = tape.add(n, keep)?;
        }
        let y = tape.matmul(state, p[self.head_w.0])?;
        let y = tape.add_broadcast(y, p[self.head_b.0])?;
        Ok(tape.reshape(y, &[b])?)
    }
}
