//! Online blind super-resolution.
//!
//! Given one low-resolution image and a pool of unrelated high-resolution
//! images, [`trainer::online_adapt`] learns the image's degradation with a
//! three-layer deep linear network while adapting a reconstruction network
//! to that degradation, and returns the super-resolved image together with
//! the recovered blur kernel.
//!
//! The crate is layered bottom-up:
//!
//! - [`numcore`]: tensors, reverse-mode differentiation, Adam.
//! - [`imaging`]: PNG I/O, seeded random streams, patch sampling, PSNR/SSIM.
//! - [`degradation`]: blur kernels, the blur-downsample-noise pipeline and the
//!   learnable degradation network.
//! - [`models`]: the reconstructor and discriminators plus their parameter files.
//! - [`trainer`]: losses, the alternating update step and the adaptation loop.
//! - [`cli`]: the `onsr` command-line tool.

pub mod cli;
pub mod degradation;
pub mod error;
pub mod imaging;
pub mod models;
pub mod numcore;
pub mod trainer;

pub use error::{Error, Result};
