use crate::error::{Result, TensorError};
use crate::gemm::gemm;
use crate::tensor::Tensor;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    AddSuffix(usize, usize),
    MulSuffix(usize, usize),
    Affine(usize, f64),
    MatMul {
        a: usize,
        b: usize,
        rows: usize,
        k: usize,
        n: usize,
    },
    BatchMatMul {
        a: usize,
        b: usize,
        batch: usize,
        m: usize,
        k: usize,
        n: usize,
        b_transposed: bool,
    },
    LeftMatMul {
        a: usize,
        x: usize,
        blocks: usize,
        m: usize,
        k: usize,
        n: usize,
    },
    Relu(usize),
    Sigmoid(usize),
    Tanh(usize),
    Softmax(usize, usize),
    Normalize {
        x: usize,
        cols: usize,
        inv_std: Vec<f64>,
    },
    MeanAxis {
        x: usize,
        outer: usize,
        len: usize,
        inner: usize,
    },
    Sum(usize),
    Concat {
        inputs: Vec<usize>,
        outer: usize,
        chunks: Vec<usize>,
    },
    Slice {
        x: usize,
        outer: usize,
        len: usize,
        inner: usize,
        start: usize,
        take: usize,
    },
    Transpose {
        x: usize,
        out_shape: Vec<usize>,
        a1: usize,
        a2: usize,
    },
    Reshape(usize),
    Mse(usize, usize),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Operation record for one forward/backward pass.
///
/// Nodes are appended in evaluation order, so the record is topologically
/// sorted by construction and backward is a single reverse sweep. Results of
/// operations whose inputs are all constants are stored as constants and carry
/// no backward rule.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
}

fn mismatch(op: &'static str, lhs: &[usize], rhs: &[usize]) -> TensorError {
    TensorError::ShapeMismatch {
        op,
        lhs: lhs.to_vec(),
        rhs: rhs.to_vec(),
    }
}

fn invalid(op: &'static str, shape: &[usize], reason: impl Into<String>) -> TensorError {
    TensorError::InvalidShape {
        op,
        shape: shape.to_vec(),
        reason: reason.into(),
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Copies `data` (laid out with `shape`) into the layout with axes `a1` and
/// `a2` exchanged.
fn swap_axes(data: &[f64], shape: &[usize], a1: usize, a2: usize) -> Vec<f64> {
    let (a1, a2) = (a1.min(a2), a1.max(a2));
    if a1 == a2 {
        return data.to_vec();
    }
    // [P, A, M, B, Q] -> [P, B, M, A, Q]
    let p: usize = shape[..a1].iter().product();
    let (na, nb) = (shape[a1], shape[a2]);
    let m: usize = shape[a1 + 1..a2].iter().product();
    let q: usize = shape[a2 + 1..].iter().product();
    let mut out = Vec::with_capacity(data.len());
    for pi in 0..p {
        for bi in 0..nb {
            for mi in 0..m {
                for ai in 0..na {
                    let from = (((pi * na + ai) * m + mi) * nb + bi) * q;
                    out.extend_from_slice(&data[from..from + q]);
                }
            }
        }
    }
    out
}

/// (product before `axis`, size of `axis`, product after `axis`)
fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A leaf that does not receive gradients.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_leaf(value, false)
    }

    /// A leaf that receives gradients.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push_leaf(value, true)
    }

    fn push_leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[usize]) -> Var {
        let requires_grad = inputs.iter().any(|&i| self.nodes[i].requires_grad);
        let op = if requires_grad { op } else { Op::Leaf };
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Gradient accumulated by the last [`backward`](Self::backward), if the
    /// node was reached.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }

    /// Gradient of `v`, zero-filled when `v` was not reached by backward.
    pub fn grad_or_zeros(&self, v: Var) -> Vec<f64> {
        self.grad(v)
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.0; self.nodes[v.0].value.numel()])
    }

    fn data(&self, v: usize) -> &[f64] {
        self.nodes[v].value.data()
    }

    fn elementwise(
        &mut self,
        op_name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(mismatch(op_name, sa, sb));
        }
        let data = self
            .data(a.0)
            .iter()
            .zip(self.data(b.0))
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::new(sa.to_vec(), data)?;
        Ok(self.push(value, op, &[a.0, b.0]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("add", a, b, |x, y| x + y, Op::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("sub", a, b, |x, y| x - y, Op::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("mul", a, b, |x, y| x * y, Op::Mul(a.0, b.0))
    }

    fn suffix_operands(&self, op: &'static str, a: Var, b: Var) -> Result<usize> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sb.len() > sa.len() || sa[sa.len() - sb.len()..] != *sb {
            return Err(mismatch(op, sa, sb));
        }
        Ok(self.value(b).numel())
    }

    /// `a + b` where `b`'s shape is a trailing suffix of `a`'s shape.
    pub fn add_broadcast(&mut self, a: Var, b: Var) -> Result<Var> {
        let chunk = self.suffix_operands("add_broadcast", a, b)?;
        let bd = self.data(b.0);
        let data = self
            .data(a.0)
            .chunks(chunk)
            .flat_map(|row| row.iter().zip(bd).map(|(x, y)| x + y))
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), data)?;
        Ok(self.push(value, Op::AddSuffix(a.0, b.0), &[a.0, b.0]))
    }

    /// `a * b` where `b`'s shape is a trailing suffix of `a`'s shape.
    pub fn mul_broadcast(&mut self, a: Var, b: Var) -> Result<Var> {
        let chunk = self.suffix_operands("mul_broadcast", a, b)?;
        let bd = self.data(b.0);
        let data = self
            .data(a.0)
            .chunks(chunk)
            .flat_map(|row| row.iter().zip(bd).map(|(x, y)| x * y))
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), data)?;
        Ok(self.push(value, Op::MulSuffix(a.0, b.0), &[a.0, b.0]))
    }

    /// `scale * x + shift`, elementwise.
    pub fn affine(&mut self, x: Var, scale: f64, shift: f64) -> Result<Var> {
        let data = self.data(x.0).iter().map(|v| scale * v + shift).collect();
        let value = Tensor::new(self.shape(x).to_vec(), data)?;
        Ok(self.push(value, Op::Affine(x.0, scale), &[x.0]))
    }

    pub fn scale(&mut self, x: Var, scale: f64) -> Result<Var> {
        self.affine(x, scale, 0.0)
    }

    /// `a [.., M, K] · b [K, N] → [.., M, N]`; leading axes of `a` are
    /// flattened into rows.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.is_empty() || sb.len() != 2 || sa[sa.len() - 1] != sb[0] {
            return Err(mismatch("matmul", &sa, &sb));
        }
        let (k, n) = (sb[0], sb[1]);
        let rows = self.value(a).numel() / k;
        let mut out = vec![0.0; rows * n];
        gemm(
            rows,
            k,
            n,
            self.data(a.0),
            false,
            self.data(b.0),
            false,
            &mut out,
            false,
        );
        let mut shape = sa;
        *shape.last_mut().unwrap() = n;
        let value = Tensor::new(shape, out)?;
        Ok(self.push(
            value,
            Op::MatMul {
                a: a.0,
                b: b.0,
                rows,
                k,
                n,
            },
            &[a.0, b.0],
        ))
    }

    fn batch_matmul(&mut self, a: Var, b: Var, b_transposed: bool) -> Result<Var> {
        let op = if b_transposed { "bmm_nt" } else { "bmm" };
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() != 3 || sb.len() != 3 || sa[0] != sb[0] {
            return Err(mismatch(op, &sa, &sb));
        }
        let (batch, m, k) = (sa[0], sa[1], sa[2]);
        let (kb, n) = if b_transposed { (sb[2], sb[1]) } else { (sb[1], sb[2]) };
        if kb != k {
            return Err(mismatch(op, &sa, &sb));
        }
        let mut out = vec![0.0; batch * m * n];
        let (ad, bd) = (self.data(a.0), self.data(b.0));
        for i in 0..batch {
            gemm(
                m,
                k,
                n,
                &ad[i * m * k..(i + 1) * m * k],
                false,
                &bd[i * k * n..(i + 1) * k * n],
                b_transposed,
                &mut out[i * m * n..(i + 1) * m * n],
                false,
            );
        }
        let value = Tensor::new(vec![batch, m, n], out)?;
        let op = Op::BatchMatMul {
            a: a.0,
            b: b.0,
            batch,
            m,
            k,
            n,
            b_transposed,
        };
        Ok(self.push(value, op, &[a.0, b.0]))
    }

    /// Batched product `[B, M, K] · [B, K, N] → [B, M, N]`.
    pub fn bmm(&mut self, a: Var, b: Var) -> Result<Var> {
        self.batch_matmul(a, b, false)
    }

    /// Batched product with the second operand transposed:
    /// `[B, M, K] · [B, N, K]ᵀ → [B, M, N]`.
    pub fn bmm_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        self.batch_matmul(a, b, true)
    }

    /// `a [M, K]` applied to every trailing `[K, N]` block of `x`:
    /// `x [.., K, N] → [.., M, N]`.
    pub fn left_matmul(&mut self, a: Var, x: Var) -> Result<Var> {
        let (sa, sx) = (self.shape(a).to_vec(), self.shape(x).to_vec());
        if sa.len() != 2 || sx.len() < 2 || sx[sx.len() - 2] != sa[1] {
            return Err(mismatch("left_matmul", &sa, &sx));
        }
        let (m, k) = (sa[0], sa[1]);
        let n = sx[sx.len() - 1];
        let blocks = self.value(x).numel() / (k * n);
        let mut out = vec![0.0; blocks * m * n];
        let (ad, xd) = (self.data(a.0), self.data(x.0));
        for i in 0..blocks {
            gemm(
                m,
                k,
                n,
                ad,
                false,
                &xd[i * k * n..(i + 1) * k * n],
                false,
                &mut out[i * m * n..(i + 1) * m * n],
                false,
            );
        }
        let mut shape = sx;
        let r = shape.len();
        shape[r - 2] = m;
        let value = Tensor::new(shape, out)?;
        let op = Op::LeftMatMul {
            a: a.0,
            x: x.0,
            blocks,
            m,
            k,
            n,
        };
        Ok(self.push(value, op, &[a.0, x.0]))
    }

    fn unary(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Result<Var> {
        let data = self.data(x.0).iter().map(|&v| f(v)).collect();
        let value = Tensor::new(self.shape(x).to_vec(), data)?;
        Ok(self.push(value, op, &[x.0]))
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        self.unary(x, |v| v.max(0.0), Op::Relu(x.0))
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        self.unary(x, sigmoid, Op::Sigmoid(x.0))
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        self.unary(x, f64::tanh, Op::Tanh(x.0))
    }

    fn last_axis(&self, op: &'static str, x: Var) -> Result<usize> {
        self.shape(x)
            .last()
            .copied()
            .ok_or_else(|| invalid(op, self.shape(x), "needs at least one axis"))
    }

    /// Softmax over the last axis, computed with max subtraction.
    pub fn softmax(&mut self, x: Var) -> Result<Var> {
        let cols = self.last_axis("softmax", x)?;
        let mut data = self.data(x.0).to_vec();
        for row in data.chunks_mut(cols) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        let value = Tensor::new(self.shape(x).to_vec(), data)?;
        Ok(self.push(value, Op::Softmax(x.0, cols), &[x.0]))
    }

    /// Zero-mean, unit-variance normalization over the last axis (biased
    /// variance plus `eps`), without affine terms.
    pub fn normalize(&mut self, x: Var, eps: f64) -> Result<Var> {
        let cols = self.last_axis("normalize", x)?;
        let mut data = self.data(x.0).to_vec();
        let mut inv_std = Vec::with_capacity(data.len() / cols);
        for row in data.chunks_mut(cols) {
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / cols as f64;
            let inv = 1.0 / (var + eps).sqrt();
            for v in row.iter_mut() {
                *v = (*v - mean) * inv;
            }
            inv_std.push(inv);
        }
        let value = Tensor::new(self.shape(x).to_vec(), data)?;
        Ok(self.push(value, Op::Normalize { x: x.0, cols, inv_std }, &[x.0]))
    }

    /// Layer normalization over the last axis with learned `gamma`, `beta`.
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var, eps: f64) -> Result<Var> {
        let n = self.normalize(x, eps)?;
        let scaled = self.mul_broadcast(n, gamma)?;
        self.add_broadcast(scaled, beta)
    }

    /// Mean over `axis`; the axis is removed from the shape.
    pub fn mean_axis(&mut self, x: Var, axis: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() {
            return Err(invalid("mean_axis", &shape, format!("axis {axis} out of range")));
        }
        let (outer, len, inner) = split_axis(&shape, axis);
        let src = self.data(x.0);
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for l in 0..len {
                let base = (o * len + l) * inner;
                for i in 0..inner {
                    out[o * inner + i] += src[base + i];
                }
            }
        }
        let inv = 1.0 / len as f64;
        out.iter_mut().for_each(|v| *v *= inv);
        let mut out_shape = shape;
        out_shape.remove(axis);
        let value = Tensor::new(out_shape, out)?;
        Ok(self.push(
            value,
            Op::MeanAxis {
                x: x.0,
                outer,
                len,
                inner,
            },
            &[x.0],
        ))
    }

    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let total = self.data(x.0).iter().sum();
        Ok(self.push(Tensor::scalar(total), Op::Sum(x.0), &[x.0]))
    }

    pub fn mean(&mut self, x: Var) -> Result<Var> {
        let n = self.value(x).numel() as f64;
        let s = self.sum(x)?;
        self.scale(s, 1.0 / n)
    }

    /// Concatenation along `axis`; other axes must agree.
    pub fn concat(&mut self, inputs: &[Var], axis: usize) -> Result<Var> {
        let first = inputs.first().ok_or(TensorError::EmptyInput { op: "concat" })?;
        let base = self.shape(*first).to_vec();
        if axis >= base.len() {
            return Err(invalid("concat", &base, format!("axis {axis} out of range")));
        }
        let mut total = 0;
        for v in inputs {
            let s = self.shape(*v);
            let agrees =
                s.len() == base.len() && s.iter().zip(&base).enumerate().all(|(d, (a, b))| d == axis || a == b);
            if !agrees {
                return Err(mismatch("concat", &base, s));
            }
            total += s[axis];
        }
        let (outer, _, inner) = split_axis(&base, axis);
        let chunks: Vec<usize> = inputs.iter().map(|v| self.shape(*v)[axis] * inner).collect();
        let mut out = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for (v, &c) in inputs.iter().zip(&chunks) {
                out.extend_from_slice(&self.data(v.0)[o * c..(o + 1) * c]);
            }
        }
        let mut shape = base;
        shape[axis] = total;
        let value = Tensor::new(shape, out)?;
        let ids: Vec<usize> = inputs.iter().map(|v| v.0).collect();
        let op = Op::Concat {
            inputs: ids.clone(),
            outer,
            chunks,
        };
        Ok(self.push(value, op, &ids))
    }

    /// Elements `start..start + len` along `axis`; the axis is kept.
    pub fn slice(&mut self, x: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() || len == 0 || start + len > shape[axis] {
            return Err(invalid(
                "slice",
                &shape,
                format!("range {start}..{} on axis {axis}", start + len),
            ));
        }
        let (outer, full, inner) = split_axis(&shape, axis);
        let src = self.data(x.0);
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let from = (o * full + start) * inner;
            out.extend_from_slice(&src[from..from + len * inner]);
        }
        let mut out_shape = shape;
        out_shape[axis] = len;
        let value = Tensor::new(out_shape, out)?;
        let op = Op::Slice {
            x: x.0,
            outer,
            len: full,
            inner,
            start,
            take: len,
        };
        Ok(self.push(value, op, &[x.0]))
    }

    /// Exchanges two axes.
    pub fn transpose(&mut self, x: Var, a1: usize, a2: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if a1 >= shape.len() || a2 >= shape.len() {
            return Err(invalid("transpose", &shape, format!("axes ({a1}, {a2})")));
        }
        let data = swap_axes(self.data(x.0), &shape, a1, a2);
        let mut out_shape = shape;
        out_shape.swap(a1, a2);
        let value = Tensor::new(out_shape.clone(), data)?;
        let op = Op::Transpose {
            x: x.0,
            out_shape,
            a1,
            a2,
        };
        Ok(self.push(value, op, &[x.0]))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(x).clone().reshaped(shape)?;
        Ok(self.push(value, Op::Reshape(x.0), &[x.0]))
    }

    /// Mean squared error between two same-shape tensors.
    pub fn mse_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        let (sp, st) = (self.shape(pred), self.shape(target));
        if sp != st {
            return Err(mismatch("mse_loss", sp, st));
        }
        let n = self.value(pred).numel();
        if n == 0 {
            return Err(TensorError::EmptyInput { op: "mse_loss" });
        }
        let total: f64 = self
            .data(pred.0)
            .iter()
            .zip(self.data(target.0))
            .map(|(p, t)| (p - t).powi(2))
            .sum();
        let value = Tensor::scalar(total / n as f64);
        Ok(self.push(value, Op::Mse(pred.0, target.0), &[pred.0, target.0]))
    }

    /// Reverse sweep from a scalar `loss`. Gradients from a previous sweep are
    /// discarded.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let shape = self.shape(loss);
        if !shape.is_empty() && shape.iter().product::<usize>() != 1 {
            return Err(TensorError::NonScalarLoss { shape: shape.to_vec() });
        }
        self.grads.iter_mut().for_each(|g| *g = None);
        if !self.nodes[loss.0].requires_grad {
            return Ok(());
        }
        self.grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            if matches!(self.nodes[i].op, Op::Leaf) {
                continue;
            }
            let Some(g) = self.grads[i].take() else {
                continue;
            };
            self.backprop_node(i, &g);
            self.grads[i] = Some(g);
        }
        Ok(())
    }

    fn backprop_node(&mut self, i: usize, g: &[f64]) {
        let nodes = &self.nodes;
        let grads = &mut self.grads;
        let mut acc = |idx: usize, f: &mut dyn FnMut(&mut [f64])| {
            if !nodes[idx].requires_grad {
                return;
            }
            let slot = grads[idx].get_or_insert_with(|| vec![0.0; nodes[idx].value.numel()]);
            f(slot);
        };
        let val = |idx: usize| nodes[idx].value.data();
        let out = nodes[i].value.data();

        match &nodes[i].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s += g));
                acc(*b, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s += g));
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s += g));
                acc(*b, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s -= g));
            }
            Op::Mul(a, b) => {
                let (av, bv) = (val(*a), val(*b));
                acc(*a, &mut |s| {
                    for j in 0..s.len() {
                        s[j] += g[j] * bv[j];
                    }
                });
                acc(*b, &mut |s| {
                    for j in 0..s.len() {
                        s[j] += g[j] * av[j];
                    }
                });
            }
            Op::AddSuffix(a, b) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s += g));
                acc(*b, &mut |s| {
                    let c = s.len();
                    for row in g.chunks(c) {
                        s.iter_mut().zip(row).for_each(|(s, g)| *s += g);
                    }
                });
            }
            Op::MulSuffix(a, b) => {
                let (av, bv) = (val(*a), val(*b));
                let c = bv.len();
                acc(*a, &mut |s| {
                    for (j, v) in s.iter_mut().enumerate() {
                        *v += g[j] * bv[j % c];
                    }
                });
                acc(*b, &mut |s| {
                    for (j, (gj, aj)) in g.iter().zip(av).enumerate() {
                        s[j % c] += gj * aj;
                    }
                });
            }
            Op::Affine(x, scale) => {
                acc(*x, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s += scale * g));
            }
            Op::MatMul { a, b, rows, k, n } => {
                let (av, bv) = (val(*a), val(*b));
                // dA = G·Bᵀ, dB = Aᵀ·G
                acc(*a, &mut |s| gemm(*rows, *n, *k, g, false, bv, true, s, true));
                acc(*b, &mut |s| gemm(*k, *rows, *n, av, true, g, false, s, true));
            }
            Op::BatchMatMul {
                a,
                b,
                batch,
                m,
                k,
                n,
                b_transposed,
            } => {
                let (av, bv) = (val(*a), val(*b));
                let (m, k, n) = (*m, *k, *n);
                acc(*a, &mut |s| {
                    for bi in 0..*batch {
                        let gs = &g[bi * m * n..(bi + 1) * m * n];
                        let bs = &bv[bi * k * n..(bi + 1) * k * n];
                        let ss = &mut s[bi * m * k..(bi + 1) * m * k];
                        // dA = G·Bᵀ where B is k×n (or stored n×k when transposed)
                        gemm(m, n, k, gs, false, bs, !*b_transposed, ss, true);
                    }
                });
                acc(*b, &mut |s| {
                    for bi in 0..*batch {
                        let gs = &g[bi * m * n..(bi + 1) * m * n];
                        let as_ = &av[bi * m * k..(bi + 1) * m * k];
                        let ss = &mut s[bi * k * n..(bi + 1) * k * n];
                        if *b_transposed {
                            // B stored n×k: dB = Gᵀ·A
                            gemm(n, m, k, gs, true, as_, false, ss, true);
                        } else {
                            gemm(k, m, n, as_, true, gs, false, ss, true);
                        }
                    }
                });
            }
            Op::LeftMatMul { a, x, blocks, m, k, n } => {
                let (av, xv) = (val(*a), val(*x));
                let (m, k, n) = (*m, *k, *n);
                acc(*a, &mut |s| {
                    for bi in 0..*blocks {
                        let gs = &g[bi * m * n..(bi + 1) * m * n];
                        let xs = &xv[bi * k * n..(bi + 1) * k * n];
                        gemm(m, n, k, gs, false, xs, true, s, true);
                    }
                });
                acc(*x, &mut |s| {
                    for bi in 0..*blocks {
                        let gs = &g[bi * m * n..(bi + 1) * m * n];
                        let ss = &mut s[bi * k * n..(bi + 1) * k * n];
                        gemm(k, m, n, av, true, gs, false, ss, true);
                    }
                });
            }
            Op::Relu(x) => {
                let xv = val(*x);
                acc(*x, &mut |s| {
                    for j in 0..s.len() {
                        if xv[j] > 0.0 {
                            s[j] += g[j];
                        }
                    }
                });
            }
            Op::Sigmoid(x) => acc(*x, &mut |s| {
                for j in 0..s.len() {
                    s[j] += g[j] * out[j] * (1.0 - out[j]);
                }
            }),
            Op::Tanh(x) => acc(*x, &mut |s| {
                for j in 0..s.len() {
                    s[j] += g[j] * (1.0 - out[j] * out[j]);
                }
            }),
            Op::Softmax(x, cols) => acc(*x, &mut |s| {
                for ((srow, grow), yrow) in s.chunks_mut(*cols).zip(g.chunks(*cols)).zip(out.chunks(*cols)) {
                    let dot: f64 = grow.iter().zip(yrow).map(|(a, b)| a * b).sum();
                    for j in 0..*cols {
                        srow[j] += yrow[j] * (grow[j] - dot);
                    }
                }
            }),
            Op::Normalize { x, cols, inv_std } => acc(*x, &mut |s| {
                let c = *cols as f64;
                for (r, ((srow, grow), yrow)) in s
                    .chunks_mut(*cols)
                    .zip(g.chunks(*cols))
                    .zip(out.chunks(*cols))
                    .enumerate()
                {
                    let mean_g = grow.iter().sum::<f64>() / c;
                    let mean_gy = grow.iter().zip(yrow).map(|(a, b)| a * b).sum::<f64>() / c;
                    for j in 0..*cols {
                        srow[j] += inv_std[r] * (grow[j] - mean_g - yrow[j] * mean_gy);
                    }
                }
            }),
            Op::MeanAxis { x, outer, len, inner } => acc(*x, &mut |s| {
                let inv = 1.0 / *len as f64;
                for o in 0..*outer {
                    for l in 0..*len {
                        let base = (o * len + l) * inner;
                        for ii in 0..*inner {
                            s[base + ii] += g[o * inner + ii] * inv;
                        }
                    }
                }
            }),
            Op::Sum(x) => acc(*x, &mut |s| s.iter_mut().for_each(|v| *v += g[0])),
            Op::Concat { inputs, outer, chunks } => {
                let total: usize = chunks.iter().sum();
                let mut offset = 0;
                for (v, &c) in inputs.iter().zip(chunks) {
                    acc(*v, &mut |s| {
                        for o in 0..*outer {
                            let src = &g[o * total + offset..o * total + offset + c];
                            s[o * c..(o + 1) * c].iter_mut().zip(src).for_each(|(s, g)| *s += g);
                        }
                    });
                    offset += c;
                }
            }
            Op::Slice {
                x,
                outer,
                len,
                inner,
                start,
                take,
            } => acc(*x, &mut |s| {
                let w = take * inner;
                for o in 0..*outer {
                    let to = (o * len + start) * inner;
                    s[to..to + w]
                        .iter_mut()
                        .zip(&g[o * w..(o + 1) * w])
                        .for_each(|(s, g)| *s += g);
                }
            }),
            Op::Transpose { x, out_shape, a1, a2 } => {
                let back = swap_axes(g, out_shape, *a1, *a2);
                acc(*x, &mut |s| s.iter_mut().zip(&back).for_each(|(s, g)| *s += g));
            }
            Op::Reshape(x) => acc(*x, &mut |s| s.iter_mut().zip(g).for_each(|(s, g)| *s += g)),
            Op::Mse(p, t) => {
                let (pv, tv) = (val(*p), val(*t));
                let scale = 2.0 * g[0] / pv.len() as f64;
                acc(*p, &mut |s| {
                    for j in 0..s.len() {
                        s[j] += scale * (pv[j] - tv[j]);
                    }
                });
                acc(*t, &mut |s| {
                    for j in 0..s.len() {
                        s[j] -= scale * (pv[j] - tv[j]);
                    }
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> Tensor {
        Tensor::new(vec![rows, cols], data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_by_identity() {
        let mut tape = Tape::new();
        let a = tape.constant(mat(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let i = tape.constant(mat(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let c = tape.matmul(a, i).unwrap();
        assert_eq!(tape.value(c).data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(&[2, 3]));
        let b = tape.constant(Tensor::zeros(&[2, 3]));
        let err = tape.matmul(a, b).unwrap_err();
        assert_eq!(
            err,
            TensorError::ShapeMismatch {
                op: "matmul",
                lhs: vec![2, 3],
                rhs: vec![2, 3]
            }
        );
        assert!(err.to_string().contains("[2, 3]"));
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(&[0.0, 0.0, 0.0]));
        let y = tape.softmax(x).unwrap();
        for v in tape.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_handles_large_logits() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(&[1000.0, 1000.0]));
        let y = tape.softmax(x).unwrap();
        assert_eq!(tape.value(y).data(), &[0.5, 0.5]);
    }

    #[test]
    fn normalize_constant_row_is_zero() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(&[4.2; 6]));
        let y = tape.normalize(x, 1e-5).unwrap();
        assert!(tape.value(y).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sum_gradient_is_ones() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::full(&[2, 3, 4], 0.5));
        let s = tape.sum(x).unwrap();
        tape.backward(s).unwrap();
        assert!(tape.grad(x).unwrap().iter().all(|&g| g == 1.0));
    }

    #[test]
    fn square_gradient() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::scalar(3.0));
        let y = tape.mul(x, x).unwrap();
        tape.backward(y).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[6.0]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::zeros(&[3]));
        let err = tape.backward(x).unwrap_err();
        assert_eq!(err, TensorError::NonScalarLoss { shape: vec![3] });
    }

    #[test]
    fn unreachable_param_keeps_zero_grad() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::vector(&[1.0, 2.0]));
        let unused = tape.param(Tensor::vector(&[5.0]));
        let s = tape.sum(x).unwrap();
        tape.backward(s).unwrap();
        assert!(tape.grad(unused).is_none());
        assert_eq!(tape.grad_or_zeros(unused), vec![0.0]);
    }

    #[test]
    fn constant_inputs_are_not_recorded() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::vector(&[1.0, 2.0]));
        let b = tape.constant(Tensor::vector(&[3.0, 4.0]));
        let c = tape.add(a, b).unwrap();
        assert!(!tape.requires_grad(c));
        let p = tape.param(Tensor::vector(&[0.0, 0.0]));
        let d = tape.add(c, p).unwrap();
        assert!(tape.requires_grad(d));
    }

    #[test]
    fn transpose_swaps_middle_axes() {
        let mut tape = Tape::new();
        let data: Vec<f64> = (0..24).map(f64::from).collect();
        let x = tape.constant(Tensor::new(vec![2, 3, 4], data).unwrap());
        let y = tape.transpose(x, 0, 2).unwrap();
        assert_eq!(tape.shape(y), &[4, 3, 2]);
        let v = tape.value(y).data();
        // y[k][j][i] = x[i][j][k] = i*12 + j*4 + k
        assert_eq!(v[(3 * 3 + 1) * 2 + 1], 12.0 + 4.0 + 3.0);
    }

    #[test]
    fn concat_and_slice_round_trip() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let b = tape.constant(Tensor::new(vec![2, 1], vec![9.0, 8.0]).unwrap());
        let c = tape.concat(&[a, b], 1).unwrap();
        assert_eq!(tape.value(c).data(), &[1.0, 2.0, 9.0, 3.0, 4.0, 8.0]);
        let back = tape.slice(c, 1, 2, 1).unwrap();
        assert_eq!(tape.value(back).data(), &[9.0, 8.0]);
    }

    #[test]
    fn mse_reference_value() {
        let mut tape = Tape::new();
        let p = tape.constant(Tensor::vector(&[1.0, 3.0]));
        let t = tape.constant(Tensor::vector(&[1.0, 1.0]));
        let l = tape.mse_loss(p, t).unwrap();
        assert_eq!(tape.value(l).data(), &[2.0]);
        let same = tape.mse_loss(p, p).unwrap();
        assert_eq!(tape.value(same).data(), &[0.0]);
    }

    #[test]
    fn mean_axis_drops_axis() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap());
        let m0 = tape.mean_axis(x, 0).unwrap();
        let m1 = tape.mean_axis(x, 1).unwrap();
        assert_eq!(tape.value(m0).data(), &[2.5, 3.5, 4.5]);
        assert_eq!(tape.value(m1).data(), &[2.0, 5.0]);
    }
}
