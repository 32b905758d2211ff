//! Image buffers, PNG I/O, patch sampling, seeded randomness and quality
//! metrics.

mod image;
pub mod metrics;
mod patches;
mod rng;
pub mod synthetic;

pub use image::{load_png, quantize, save_png, ImageBuf, MIN_EXTENT};
pub use metrics::{psnr, psnr_with, ssim, ssim_with, MetricOptions};
pub use patches::{gather_patches, sample_offsets, sample_patches, Patch};
pub use rng::{Rng, Stream};
