use rand::Rng as _;

use super::{ImageBuf, Rng};
use crate::error::{ensure, Result};
use crate::numcore::Tensor;

/// A square crop and where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub y: usize,
    pub x: usize,
    pub image: ImageBuf,
}

/// `n` top-left offsets drawn uniformly over the valid positions of a
/// `size×size` window.
pub fn sample_offsets(
    height: usize,
    width: usize,
    n: usize,
    size: usize,
    rng: &mut Rng,
) -> Result<Vec<(usize, usize)>> {
    ensure!(n >= 1, "at least one patch must be requested");
    ensure!(size >= 1, "patch size must be positive");
    ensure!(
        size <= height && size <= width,
        "patch size {size} exceeds image extent {height}x{width}"
    );
    Ok((0..n)
        .map(|_| {
            let y = rng.random_range(0..=height - size);
            let x = rng.random_range(0..=width - size);
            (y, x)
        })
        .collect())
}

pub fn sample_patches(img: &ImageBuf, n: usize, size: usize, rng: &mut Rng) -> Result<Vec<Patch>> {
    sample_offsets(img.height(), img.width(), n, size, rng)?
        .into_iter()
        .map(|(y, x)| {
            Ok(Patch {
                y,
                x,
                image: img.crop(y, x, size, size)?,
            })
        })
        .collect()
}

/// Gathers `size×size` windows of a `[C, H, W]` tensor into `[n, C, size, size]`.
pub fn gather_patches(t: &Tensor, offsets: &[(usize, usize)], size: usize) -> Result<Tensor> {
    let [c, h, w] = *t.shape() else {
        return Err(crate::error::contract!(
            "patch source must be [C, H, W], got {:?}",
            t.shape()
        ));
    };
    let mut out = Vec::with_capacity(offsets.len() * c * size * size);
    for &(y, x) in offsets {
        ensure!(
            y + size <= h && x + size <= w,
            "patch {size}x{size} at ({y},{x}) exceeds extent {h}x{w}"
        );
        for ch in 0..c {
            for row in y..y + size {
                let s = (ch * h + row) * w + x;
                out.extend_from_slice(&t.data()[s..s + size]);
            }
        }
    }
    Tensor::from_vec(vec![offsets.len(), c, size, size], out)
}
