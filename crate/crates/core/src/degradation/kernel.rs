use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ensure, Error, Result};
use crate::numcore::{Scalar, Tensor};

/// Square blur kernel with an odd extent, applied as a correlation.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    size: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        ensure!(size % 2 == 1, "kernel size must be odd, got {size}");
        ensure!(
            taps.len() == size * size,
            "{} taps for a {size}x{size} kernel",
            taps.len()
        );
        Ok(Self { size, taps })
    }

    /// Unit impulse.
    pub fn delta(size: usize) -> Result<Self> {
        let mut taps = vec![0.0; size * size];
        let c = size / 2;
        if size % 2 == 1 {
            taps[c * size + c] = 1.0;
        }
        Self::new(size, taps)
    }

    /// Isotropic Gaussian of standard deviation `sigma`, unit sum.
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        ensure!(sigma > 0.0, "gaussian sigma must be positive");
        let r = (size / 2) as f64;
        let mut taps = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                let (dy, dx) = (y as f64 - r, x as f64 - r);
                taps.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
            }
        }
        Self::new(size, taps)?.normalized()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.taps[y * self.size + x]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Scaled to unit sum; a zero-sum kernel is rejected.
    pub fn normalized(mut self) -> Result<Self> {
        let s = self.sum();
        ensure!(
            s.is_finite() && s.abs() > 1e-300,
            "cannot normalize a kernel summing to {s}"
        );
        for t in &mut self.taps {
            *t /= s;
        }
        Ok(self)
    }

    /// Rotated by 180 degrees (turns a correlation kernel into the matching
    /// convolution kernel and back).
    pub fn flipped(&self) -> Self {
        let mut taps = self.taps.clone();
        taps.reverse();
        Self {
            size: self.size,
            taps,
        }
    }

    /// Zero-padded or centre-cropped to `size`.
    pub fn resized(&self, size: usize) -> Result<Self> {
        ensure!(size % 2 == 1, "kernel size must be odd, got {size}");
        let mut taps = vec![0.0; size * size];
        let (src_r, dst_r) = ((self.size / 2) as i64, (size / 2) as i64);
        for y in 0..size as i64 {
            for x in 0..size as i64 {
                let (sy, sx) = (y - dst_r + src_r, x - dst_r + src_r);
                if (0..self.size as i64).contains(&sy) && (0..self.size as i64).contains(&sx) {
                    taps[(y * size as i64 + x) as usize] = self.at(sy as usize, sx as usize);
                }
            }
        }
        Self::new(size, taps)
    }

    /// `[1, 1, size, size]` weight tensor.
    pub fn to_tensor<T: Scalar>(&self) -> Tensor<T> {
        Tensor::from_vec(
            vec![1, 1, self.size, self.size],
            self.taps.iter().map(|&v| T::of_f64(v)).collect(),
        )
        .expect("kernel invariant")
    }

    /// Reads the trailing two axes of a square weight tensor with one spatial
    /// kernel.
    pub fn from_tensor<T: Scalar>(t: &Tensor<T>) -> Result<Self> {
        let s = t.shape();
        ensure!(
            s.len() >= 2 && s[s.len() - 1] == s[s.len() - 2] && t.numel() == s[s.len() - 1].pow(2),
            "tensor of shape {s:?} is not a single square kernel"
        );
        Self::new(s[s.len() - 1], t.data().iter().map(|v| v.as_f64()).collect())
    }

    /// Centre of mass `(y, x)` relative to the central tap.
    pub fn centroid(&self) -> (f64, f64) {
        let r = (self.size / 2) as f64;
        let (mut sy, mut sx, mut s) = (0.0, 0.0, 0.0);
        for y in 0..self.size {
            for x in 0..self.size {
                let v = self.at(y, x);
                sy += v * (y as f64 - r);
                sx += v * (x as f64 - r);
                s += v;
            }
        }
        (sy / s, sx / s)
    }

    /// Plain-text form: the size on the first line, then one comma-separated
    /// row per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", self.size);
        for y in 0..self.size {
            for x in 0..self.size {
                if x > 0 {
                    out.push(',');
                }
                write!(out, "{:e}", self.at(y, x)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "kernel CSV",
            detail,
        };
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let head = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let size: usize = head
            .split(',')
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| bad(format!("size header `{head}` is not an integer")))?;
        let mut taps = Vec::with_capacity(size * size);
        for (row, line) in lines.enumerate() {
            ensure_parse(row < size, || bad(format!("more than {size} rows")))?;
            let vals: Vec<&str> = line.split(',').collect();
            ensure_parse(vals.len() == size, || {
                bad(format!("row {} has {} values, expected {size}", row + 1, vals.len()))
            })?;
            for v in vals {
                taps.push(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("`{v}` is not a number")))?,
                );
            }
        }
        ensure_parse(taps.len() == size * size, || {
            bad(format!("expected {size} rows, found {}", taps.len() / size.max(1)))
        })?;
        Self::new(size, taps)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text).map_err(|e| match e {
            Error::Parse { what, detail } => Error::Parse {
                what,
                detail: format!("{}: {detail}", path.display()),
            },
            other => other,
        })
    }

    /// Binary 8-bit PGM scaled so the largest tap is white.
    pub fn to_pgm(&self) -> Vec<u8> {
        let max = self.taps.iter().cloned().fold(0.0f64, f64::max);
        let mut out = format!("P5\n{} {}\n255\n", self.size, self.size).into_bytes();
        out.extend(self.taps.iter().map(|&v| {
            if max > 0.0 {
                (v.max(0.0) / max * 255.0 + 0.5).floor() as u8
            } else {
                0
            }
        }));
        out
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

fn ensure_parse(cond: bool, err: impl FnOnce() -> Error) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}

/// Normalized cross-correlation at zero shift.
///
/// Both kernels are zero-padded to the larger extent around their centres,
/// then compared as mean-removed vectors (Pearson correlation).
pub fn ncc(a: &Kernel2D, b: &Kernel2D) -> Result<f64> {
    let size = a.size().max(b.size());
    let (a, b) = (a.resized(size)?, b.resized(size)?);
    let n = (size * size) as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (x, y) in a.taps().iter().zip(b.taps()) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    ensure!(da > 0.0 && db > 0.0, "correlation of a constant kernel is undefined");
    Ok(num / (da * db).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let k = Kernel2D::gaussian(5, 1.3).unwrap();
        let back = Kernel2D::from_csv(&k.to_csv()).unwrap();
        assert_eq!(k, back);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(Kernel2D::from_csv("3\n1,0,0\n0,1\n0,0,1\n").is_err());
        assert!(Kernel2D::from_csv("3\n1,0,0\n0,1,0\n").is_err());
        assert!(Kernel2D::from_csv("x\n").is_err());
    }

    #[test]
    fn even_size_rejected() {
        assert!(Kernel2D::new(4, vec![0.0; 16]).is_err());
    }

    #[test]
    fn ncc_is_one_for_scaled_copy_and_ignores_padding() {
        let a = Kernel2D::gaussian(7, 1.5).unwrap();
        let b = a.resized(11).unwrap();
        assert!((ncc(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_header_and_peak() {
        let k = Kernel2D::delta(3).unwrap();
        let p = k.to_pgm();
        assert!(p.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(p[p.len() - 9..][4], 255);
    }

    #[test]
    fn flip_of_asymmetric_kernel() {
        let k = Kernel2D::new(3, (0..9).map(f64::from).collect()).unwrap();
        assert_eq!(k.flipped().at(0, 0), 8.0);
        assert_eq!(k.flipped().flipped(), k);
    }
}
