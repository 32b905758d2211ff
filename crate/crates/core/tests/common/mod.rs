#![allow(dead_code)]

use onsr::degradation::{degrade, synth_kernel, DegradationSpec, Kernel2D, SynthOptions};
use onsr::imaging::{synthetic, ImageBuf, Rng, Stream};
use onsr::models::GrConfig;

pub mod gradsuite;
pub mod oracle;

/// Reconstructor small enough for many short sessions in a test.
pub fn tiny_gr(scale: usize) -> GrConfig {
    GrConfig {
        num_blocks: 1,
        base_channels: 8,
        growth_channels: 4,
        dense_layers: 2,
        residual_scale: 0.2,
        scale,
    }
}

pub fn hr_pool(seed: u64, count: usize, extent: usize) -> Vec<ImageBuf> {
    synthetic::scene_set(seed, count, extent, extent).unwrap()
}

/// `(hr, lr, kernel)` with a random anisotropic kernel and no noise.
pub fn observation(seed: u64, hr_extent: usize, scale: usize) -> (ImageBuf, ImageBuf, Kernel2D) {
    let hr = synthetic::scene_set(seed, 1, hr_extent, hr_extent).unwrap().remove(0);
    let mut rng = Rng::new(seed).substream(Stream::Kernel);
    let (kernel, _) = synth_kernel(&mut rng, SynthOptions::for_scale(scale)).unwrap();
    let spec = DegradationSpec::new(kernel.clone(), scale, 0.0).unwrap();
    let lr = degrade(&hr, &spec, &mut Rng::new(seed).substream(Stream::Noise)).unwrap();
    (hr, lr, kernel)
}
