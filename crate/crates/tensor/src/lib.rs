//! Minimal dense-tensor math for training small sequence regressors.
//!
//! Values are always `f64`. A [`Tape`] records every operation whose inputs
//! require gradients; [`Tape::backward`] walks the record in reverse and
//! accumulates gradients for each differentiable node. Parameters live outside
//! the tape in a [`ParamStore`] and are re-bound on every training step, so a
//! tape is a throwaway object scoped to one forward/backward pass.
//!
//! ```
//! use crossind_tensor::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.param(Tensor::scalar(3.0));
//! let y = tape.mul(x, x).unwrap();
//! tape.backward(y).unwrap();
//! assert_eq!(tape.grad(x).unwrap()[0], 6.0);
//! ```

mod error;
mod gemm;
pub mod gradcheck;
pub mod init;
mod optim;
mod params;
mod tape;
mod tensor;

pub use error::{Result, TensorError};
pub use optim::{Adam, AdamConfig};
pub use params::{ParamId, ParamStore, Parameter};
pub use tape::{Tape, Var};
pub use tensor::Tensor;
