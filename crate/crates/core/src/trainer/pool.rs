use rand::Rng as _;

use crate::error::{ensure, Result};
use crate::imaging::{gather_patches, ImageBuf, Rng};
use crate::numcore::Tensor;

/// External high-resolution images patches are drawn from.
#[derive(Clone, Debug)]
pub struct ExternalPool {
    images: Vec<Tensor>,
    patch: usize,
}

impl ExternalPool {
    /// Keeps at most `limit` images (the first ones); every image must fit a
    /// `patch×patch` window. Gray images are expanded to RGB.
    pub fn new(images: &[ImageBuf], patch: usize, limit: Option<usize>) -> Result<Self> {
        let take = limit.unwrap_or(images.len()).min(images.len());
        ensure!(take >= 1, "the external image pool is empty");
        let mut kept = Vec::with_capacity(take);
        for (i, img) in images[..take].iter().enumerate() {
            ensure!(
                img.height() >= patch && img.width() >= patch,
                "external image {i} ({}x{}) is smaller than the {patch}x{patch} patch",
                img.height(),
                img.width()
            );
            kept.push(img.to_rgb().to_tensor());
        }
        Ok(Self {
            images: kept,
            patch,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn patch_size(&self) -> usize {
        self.patch
    }

    /// `[n, 3, patch, patch]`, each patch from a uniformly chosen image at a
    /// uniformly chosen offset.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Tensor> {
        let mut items = Vec::with_capacity(n);
        for _ in 0..n {
            let img = &self.images[rng.random_range(0..self.images.len())];
            let (h, w) = (img.shape()[1], img.shape()[2]);
            let y = rng.random_range(0..=h - self.patch);
            let x = rng.random_range(0..=w - self.patch);
            items.push(gather_patches(img, &[(y, x)], self.patch)?.batch_item(0)?);
        }
        Tensor::stack(&items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_and_size_checks() {
        let imgs = vec![ImageBuf::filled(3, 64, 64, 0.1).unwrap(), ImageBuf::filled(1, 70, 66, 0.2).unwrap()];
        assert_eq!(ExternalPool::new(&imgs, 64, Some(1)).unwrap().len(), 1);
        assert_eq!(ExternalPool::new(&imgs, 64, None).unwrap().len(), 2);
        assert!(ExternalPool::new(&imgs, 65, None).is_err());
        assert!(ExternalPool::new(&[], 8, None).is_err());
    }

    #[test]
    fn samples_are_rgb_patches() {
        let imgs = vec![ImageBuf::filled(1, 40, 40, 0.2).unwrap()];
        let pool = ExternalPool::new(&imgs, 16, None).unwrap();
        let s = pool.sample(3, &mut Rng::new(0)).unwrap();
        assert_eq!(s.shape(), &[3, 3, 16, 16]);
        assert!(s.data().iter().all(|&v| (v - 0.2).abs() < 1e-7));
    }
}
