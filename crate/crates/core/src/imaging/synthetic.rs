//! Procedural RGB scenes for experiments without an external dataset.
//!
//! A scene is a smooth colour gradient overlaid with antialiased discs,
//! rotated rectangles and half-planes, a sinusoidal grating and multi-octave
//! value noise. The mix gives sharp edges at every orientation plus
//! texture at several scales, which is what blur estimation needs.

use std::f64::consts::PI;

use rand::Rng as _;

use super::{ImageBuf, Rng, Stream};
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
enum Shape {
    Disc { cy: f64, cx: f64, r: f64 },
    Rect { cy: f64, cx: f64, hh: f64, hw: f64, angle: f64 },
    HalfPlane { cy: f64, cx: f64, angle: f64 },
}

impl Shape {
    /// Signed distance, negative inside.
    fn distance(&self, y: f64, x: f64) -> f64 {
        match *self {
            Shape::Disc { cy, cx, r } => ((y - cy).powi(2) + (x - cx).powi(2)).sqrt() - r,
            Shape::Rect { cy, cx, hh, hw, angle } => {
                let (s, c) = angle.sin_cos();
                let (dy, dx) = (y - cy, x - cx);
                let u = (c * dx + s * dy).abs() - hw;
                let v = (-s * dx + c * dy).abs() - hh;
                let outside = (u.max(0.0).powi(2) + v.max(0.0).powi(2)).sqrt();
                outside + u.max(v).min(0.0)
            }
            Shape::HalfPlane { cy, cx, angle } => {
                let (s, c) = angle.sin_cos();
                c * (x - cx) + s * (y - cy)
            }
        }
    }
}

fn random_colour(rng: &mut Rng) -> [f64; 3] {
    [rng.random(), rng.random(), rng.random()]
}

/// Coverage of a pixel by a shape, from a one-pixel linear ramp.
fn coverage(d: f64) -> f64 {
    (0.5 - d).clamp(0.0, 1.0)
}

/// Bilinearly interpolated lattice noise with `cells` cells along the
/// shorter side.
fn value_noise(h: usize, w: usize, cells: usize, rng: &mut Rng) -> Vec<f64> {
    let step = h.min(w) as f64 / cells as f64;
    let gh = (h as f64 / step).ceil() as usize + 2;
    let gw = (w as f64 / step).ceil() as usize + 2;
    let lattice: Vec<f64> = (0..gh * gw).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        let fy = y as f64 / step;
        let (iy, ty) = (fy.floor() as usize, fy.fract());
        let ty = ty * ty * (3.0 - 2.0 * ty);
        for x in 0..w {
            let fx = x as f64 / step;
            let (ix, tx) = (fx.floor() as usize, fx.fract());
            let tx = tx * tx * (3.0 - 2.0 * tx);
            let l = |a: usize, b: usize| lattice[a * gw + b];
            let top = l(iy, ix) * (1.0 - tx) + l(iy, ix + 1) * tx;
            let bot = l(iy + 1, ix) * (1.0 - tx) + l(iy + 1, ix + 1) * tx;
            out[y * w + x] = top * (1.0 - ty) + bot * ty;
        }
    }
    out
}

/// One procedural RGB scene of size `height×width`.
pub fn scene(height: usize, width: usize, rng: &mut Rng) -> Result<ImageBuf> {
    let (h, w) = (height, width);
    let (hf, wf) = (h as f64, w as f64);
    let mut px = vec![[0.0f64; 3]; h * w];

    let c0 = random_colour(rng);
    let c1 = random_colour(rng);
    let ga: f64 = rng.random_range(-PI..PI);
    let (gs, gc) = ga.sin_cos();
    for y in 0..h {
        for x in 0..w {
            let t = ((gc * (x as f64 / wf - 0.5) + gs * (y as f64 / hf - 0.5)) + 0.75) / 1.5;
            let t = t.clamp(0.0, 1.0);
            for c in 0..3 {
                px[y * w + x][c] = c0[c] * (1.0 - t) + c1[c] * t;
            }
        }
    }

    let side = hf.min(wf);
    let n_shapes = rng.random_range(8..14);
    for _ in 0..n_shapes {
        let cy = rng.random_range(0.0..hf);
        let cx = rng.random_range(0.0..wf);
        let shape = match rng.random_range(0..5) {
            0 | 1 => Shape::Disc {
                cy,
                cx,
                r: rng.random_range(0.05..0.3) * side,
            },
            2 | 3 => Shape::Rect {
                cy,
                cx,
                hh: rng.random_range(0.04..0.25) * side,
                hw: rng.random_range(0.04..0.25) * side,
                angle: rng.random_range(-PI..PI),
            },
            _ => Shape::HalfPlane {
                cy,
                cx,
                angle: rng.random_range(-PI..PI),
            },
        };
        let colour = random_colour(rng);
        let alpha = rng.random_range(0.6..1.0);
        for y in 0..h {
            for x in 0..w {
                let a = alpha * coverage(shape.distance(y as f64 + 0.5, x as f64 + 0.5));
                if a > 0.0 {
                    let p = &mut px[y * w + x];
                    for c in 0..3 {
                        p[c] = p[c] * (1.0 - a) + colour[c] * a;
                    }
                }
            }
        }
    }

    // Grating confined to a disc.
    let gy = rng.random_range(0.0..hf);
    let gx = rng.random_range(0.0..wf);
    let gr = rng.random_range(0.15..0.35) * side;
    let period = rng.random_range(3.0..9.0);
    let gang: f64 = rng.random_range(-PI..PI);
    let (s, c) = gang.sin_cos();
    for y in 0..h {
        for x in 0..w {
            let (fy, fx) = (y as f64 + 0.5, x as f64 + 0.5);
            let a = 0.35 * coverage(((fy - gy).powi(2) + (fx - gx).powi(2)).sqrt() - gr);
            if a > 0.0 {
                let v = 0.5 + 0.5 * (2.0 * PI * (c * fx + s * fy) / period).sin();
                for ch in 0..3 {
                    px[y * w + x][ch] = px[y * w + x][ch] * (1.0 - a) + v * a;
                }
            }
        }
    }

    let mut noise = vec![0.0; h * w];
    for (cells, amp) in [(4usize, 0.12), (12, 0.06), (40, 0.03)] {
        for (n, v) in noise.iter_mut().zip(value_noise(h, w, cells, rng)) {
            *n += amp * v;
        }
    }

    let mut planar = vec![0f32; 3 * h * w];
    for c in 0..3 {
        for i in 0..h * w {
            planar[c * h * w + i] = (px[i][c] + noise[i]).clamp(0.0, 1.0) as f32;
        }
    }
    ImageBuf::new(3, h, w, planar)
}

/// `count` scenes from independent keyed streams of `seed`.
pub fn scene_set(seed: u64, count: usize, height: usize, width: usize) -> Result<Vec<ImageBuf>> {
    let root = Rng::new(seed);
    (0..count)
        .map(|i| scene(height, width, &mut root.keyed(Stream::Custom, &format!("scene{i}"))))
        .collect()
}
