//! Minimal tensor engine: dense arrays, a reverse-mode tape, convolution,
//! bicubic resampling, a handful of pointwise ops and losses, and Adam.
//!
//! All computation is single-threaded with a fixed reduction order, so
//! identical inputs give bit-identical values and gradients.

mod adam;
pub mod conv;
pub mod resample;
mod scalar;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use conv::{conv2d, Padding};
pub use resample::{bicubic_resample, cubic, Direction};
pub use scalar::Scalar;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

/// Negative slope used by every leaky ReLU in the networks.
pub const LEAKY_SLOPE: f64 = 0.2;
