//! Blur kernels, the synthetic observation model and the learnable deep
//! linear degradation network.

mod degrade;
mod gd;
mod kernel;
mod synth;

pub use degrade::{blur, degrade, DegradationSpec};
pub use gd::{
    bicubic_down, effective_kernel, gd_forward, gd_forward_tape, gd_init, layer_extents,
    min_support, GdNet, GD_PADDING,
};
pub use kernel::{ncc, Kernel2D};
pub use synth::{anisotropic_gaussian, synth_kernel, GaussianShape, SynthOptions};
