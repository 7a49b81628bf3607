//! Central finite-difference gradient checks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::{Result, Tape, Tensor, Var};

pub const EPS: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
pub const ABS_FLOOR: f64 = 1e-8;

/// Outcome of one check. An element passes when
/// `|analytic - numeric| <= REL_TOL * max(|analytic|, |numeric|) + ABS_FLOOR`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub name: String,
    pub elements: usize,
    /// Largest discrepancy over its tolerance; at most 1 passes.
    pub worst_ratio: f64,
    pub worst: String,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= 1.0
    }

    /// Compares per-input gradient vectors.
    pub fn compare(name: impl Into<String>, analytic: &[Vec<f64>], numeric: &[Vec<f64>]) -> Self {
        let mut out = GradCheck {
            name: name.into(),
            elements: 0,
            worst_ratio: 0.0,
            worst: String::new(),
        };
        for (k, (a, n)) in analytic.iter().zip(numeric).enumerate() {
            for (j, (&a, &n)) in a.iter().zip(n).enumerate() {
                out.elements += 1;
                let tol = REL_TOL * a.abs().max(n.abs()) + ABS_FLOOR;
                let ratio = (a - n).abs() / tol;
                if !(ratio <= out.worst_ratio) {
                    out.worst_ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
                    out.worst = format!("input {k} element {j}: analytic {a} vs numeric {n}");
                }
            }
        }
        out
    }
}

/// Central differences of `f` with respect to every element of every input.
pub fn numeric_gradients(inputs: &[Tensor], mut f: impl FnMut(&[Tensor]) -> f64) -> Vec<Vec<f64>> {
    let mut work = inputs.to_vec();
    (0..inputs.len())
        .map(|k| {
            (0..inputs[k].numel())
                .map(|j| {
                    let orig = work[k].data()[j];
                    work[k].data_mut()[j] = orig + EPS;
                    let plus = f(&work);
                    work[k].data_mut()[j] = orig - EPS;
                    let minus = f(&work);
                    work[k].data_mut()[j] = orig;
                    (plus - minus) / (2.0 * EPS)
                })
                .collect()
        })
        .collect()
}

fn random(rng: &mut StdRng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let v: f64 = rng.random_range(-1.5..1.5);
            // keep away from the ReLU kink
            if v.abs() < 1e-2 {
                v + 0.05
            } else {
                v
            }
        })
        .collect();
    Tensor::new(shape.to_vec(), data).expect("shape matches data")
}

/// Contracts `out` with a fixed weight so every output element gets a
/// distinct upstream gradient. Scalar outputs are used as they are.
fn scalarize(tape: &mut Tape, out: Var, weight: Option<&Tensor>) -> Result<Var> {
    match weight {
        None => Ok(out),
        Some(w) => {
            let w = tape.constant(w.clone());
            let prod = tape.mul(out, w)?;
            tape.sum(prod)
        }
    }
}

/// Checks `f` on random inputs of the given shapes.
pub fn check_op<F>(name: &str, seed: u64, shapes: &[&[usize]], f: F) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut rng = StdRng::seed_from_u64(seed);
    let inputs: Vec<Tensor> = shapes.iter().map(|s| random(&mut rng, s)).collect();

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    let weight = (tape.value(out).numel() != 1).then(|| random(&mut rng, tape.shape(out)));
    let loss = scalarize(&mut tape, out, weight.as_ref())?;
    tape.backward(loss)?;
    let analytic: Vec<Vec<f64>> = vars.iter().map(|v| tape.grad_or_zeros(*v)).collect();

    let numeric = numeric_gradients(&inputs, |xs| {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|t| tape.constant(t.clone())).collect();
        let out = f(&mut tape, &vars).expect("op succeeded once");
        let loss = scalarize(&mut tape, out, weight.as_ref()).expect("op succeeded once");
        tape.value(loss).data()[0]
    });
    Ok(GradCheck::compare(name, &analytic, &numeric))
}

/// Every differentiable tape operation, plus an attention composite.
pub fn op_suite() -> Result<Vec<GradCheck>> {
    type Op = fn(&mut Tape, &[Var]) -> Result<Var>;
    let cases: Vec<(&str, &[&[usize]], Op)> = vec![
        ("add", &[&[3, 4], &[3, 4]], |t, v| t.add(v[0], v[1])),
        ("sub", &[&[3, 4], &[3, 4]], |t, v| t.sub(v[0], v[1])),
        ("mul", &[&[3, 4], &[3, 4]], |t, v| t.mul(v[0], v[1])),
        ("mul_self", &[&[4]], |t, v| t.mul(v[0], v[0])),
        ("affine", &[&[5]], |t, v| t.affine(v[0], -1.7, 0.3)),
        ("scale", &[&[2, 3]], |t, v| t.scale(v[0], 0.4)),
        ("add_broadcast", &[&[2, 3, 4], &[4]], |t, v| t.add_broadcast(v[0], v[1])),
        ("add_broadcast_2d", &[&[2, 3, 4], &[3, 4]], |t, v| {
            t.add_broadcast(v[0], v[1])
        }),
        ("mul_broadcast", &[&[2, 3, 4], &[4]], |t, v| t.mul_broadcast(v[0], v[1])),
        ("matmul", &[&[3, 4], &[4, 2]], |t, v| t.matmul(v[0], v[1])),
        ("matmul_batched_rows", &[&[2, 3, 4], &[4, 5]], |t, v| {
            t.matmul(v[0], v[1])
        }),
        ("bmm", &[&[2, 3, 4], &[2, 4, 5]], |t, v| t.bmm(v[0], v[1])),
        ("bmm_nt", &[&[2, 3, 4], &[2, 5, 4]], |t, v| t.bmm_nt(v[0], v[1])),
        ("left_matmul", &[&[3, 4], &[2, 2, 4, 5]], |t, v| {
            t.left_matmul(v[0], v[1])
        }),
        ("relu", &[&[4, 5]], |t, v| t.relu(v[0])),
        ("sigmoid", &[&[4, 5]], |t, v| t.sigmoid(v[0])),
        ("tanh", &[&[4, 5]], |t, v| t.tanh(v[0])),
        ("softmax", &[&[3, 6]], |t, v| t.softmax(v[0])),
        ("normalize", &[&[3, 7]], |t, v| t.normalize(v[0], 1e-5)),
        ("layer_norm", &[&[2, 3, 5], &[5], &[5]], |t, v| {
            t.layer_norm(v[0], v[1], v[2], 1e-5)
        }),
        ("mean_axis0", &[&[3, 4, 2]], |t, v| t.mean_axis(v[0], 0)),
        ("mean_axis1", &[&[3, 4, 2]], |t, v| t.mean_axis(v[0], 1)),
        ("mean_axis2", &[&[3, 4, 2]], |t, v| t.mean_axis(v[0], 2)),
        ("sum", &[&[3, 4]], |t, v| t.sum(v[0])),
        ("mean", &[&[3, 4]], |t, v| t.mean(v[0])),
        ("concat", &[&[2, 3, 2], &[2, 1, 2], &[2, 2, 2]], |t, v| {
            t.concat(&[v[0], v[1], v[2]], 1)
        }),
        ("slice", &[&[2, 5, 3]], |t, v| t.slice(v[0], 1, 1, 3)),
        ("transpose", &[&[2, 3, 4, 5]], |t, v| t.transpose(v[0], 1, 2)),
        ("reshape", &[&[2, 6]], |t, v| t.reshape(v[0], &[3, 4])),
        ("mse_loss", &[&[6], &[6]], |t, v| t.mse_loss(v[0], v[1])),
        ("attention", &[&[2, 4, 3], &[3, 3], &[3, 3], &[3, 3]], |t, v| {
            // softmax(Q Kᵀ / sqrt(d)) V
            let q = t.matmul(v[0], v[1])?;
            let k = t.matmul(v[0], v[2])?;
            let val = t.matmul(v[0], v[3])?;
            let s = t.bmm_nt(q, k)?;
            let s = t.scale(s, 1.0 / 3f64.sqrt())?;
            let p = t.softmax(s)?;
            t.bmm(p, val)
        }),
    ];
    cases
        .into_iter()
        .enumerate()
        .map(|(i, (name, shapes, f))| check_op(name, 100 + i as u64, shapes, f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_wrong_gradient_is_caught() {
        let g = GradCheck::compare("x", &[vec![1.0, 2.0]], &[vec![1.0, 2.001]]);
        assert!(!g.passed());
        assert!(g.worst.contains("element 1"));
        assert!(GradCheck::compare("x", &[vec![1.0]], &[vec![1.0 + 1e-6]]).passed());
    }

    #[test]
    fn numeric_gradient_of_a_quadratic() {
        let x = Tensor::vector(&[1.0, -2.0]);
        let g = numeric_gradients(&[x], |xs| xs[0].data().iter().map(|v| v * v).sum());
        assert!((g[0][0] - 2.0).abs() < 1e-8 && (g[0][1] + 4.0).abs() < 1e-8);
    }
}
