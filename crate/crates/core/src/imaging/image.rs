use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{ensure, Error, Result};
use crate::numcore::Tensor;

/// Smallest accepted image extent.
pub const MIN_EXTENT: usize = 8;

/// Planar float image with samples nominally in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuf {
    height: usize,
    width: usize,
    channels: usize,
    pixels: Vec<f32>,
}

impl ImageBuf {
    /// Planar (`[c][y][x]`) pixel data.
    pub fn new(channels: usize, height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        ensure!(
            channels == 1 || channels == 3,
            "images have 1 or 3 channels, got {channels}"
        );
        ensure!(
            height >= MIN_EXTENT && width >= MIN_EXTENT,
            "image of {height}x{width} is smaller than {MIN_EXTENT}x{MIN_EXTENT}"
        );
        ensure!(
            pixels.len() == channels * height * width,
            "{} samples for a {channels}x{height}x{width} image",
            pixels.len()
        );
        Ok(Self {
            height,
            width,
            channels,
            pixels,
        })
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(channels, height, width, vec![value; channels * height * width])
    }

    /// Builds an image from a `[C, H, W]` tensor, clamping into `[0, 1]` when
    /// `clamp` is set.
    pub fn from_tensor(t: &Tensor, clamp: bool) -> Result<Self> {
        let [c, h, w] = *t.shape() else {
            return Err(crate::error::contract!(
                "image tensors are [C, H, W], got {:?}",
                t.shape()
            ));
        };
        let pixels = if clamp {
            t.data().iter().map(|v| v.clamp(0.0, 1.0)).collect()
        } else {
            t.data().to_vec()
        };
        Self::new(c, h, w, pixels)
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_vec(
            vec![self.channels, self.height, self.width],
            self.pixels.clone(),
        )
        .expect("image invariant")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.pixels
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.pixels[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &ImageBuf) -> bool {
        (self.channels, self.height, self.width) == (other.channels, other.height, other.width)
    }

    /// Copy of the `h×w` window with top-left corner `(y, x)`.
    pub fn crop(&self, y: usize, x: usize, h: usize, w: usize) -> Result<ImageBuf> {
        ensure!(
            y + h <= self.height && x + w <= self.width,
            "crop {h}x{w} at ({y},{x}) exceeds {}x{} image",
            self.height,
            self.width
        );
        let mut out = Vec::with_capacity(self.channels * h * w);
        for c in 0..self.channels {
            for row in y..y + h {
                let start = (c * self.height + row) * self.width + x;
                out.extend_from_slice(&self.pixels[start..start + w]);
            }
        }
        ImageBuf::new(self.channels, h, w, out)
    }

    /// Removes `border` pixels from every side.
    pub fn crop_border(&self, border: usize) -> Result<ImageBuf> {
        ensure!(
            2 * border < self.height && 2 * border < self.width,
            "border crop {border} leaves nothing of a {}x{} image",
            self.height,
            self.width
        );
        self.crop(border, border, self.height - 2 * border, self.width - 2 * border)
    }

    /// Largest top-left crop whose extents are multiples of `m`.
    pub fn crop_to_multiple(&self, m: usize) -> Result<ImageBuf> {
        let h = self.height / m * m;
        let w = self.width / m * m;
        self.crop(0, 0, h, w)
    }

    pub fn clamped(&self) -> ImageBuf {
        ImageBuf {
            pixels: self.pixels.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            ..self.clone()
        }
    }

    /// Gray images are repeated into three channels.
    pub fn to_rgb(&self) -> ImageBuf {
        if self.channels == 3 {
            return self.clone();
        }
        let mut pixels = Vec::with_capacity(self.pixels.len() * 3);
        for _ in 0..3 {
            pixels.extend_from_slice(&self.pixels);
        }
        ImageBuf {
            channels: 3,
            pixels,
            ..self.clone()
        }
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuf> {
        load_png(path.as_ref())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        save_png(self, path.as_ref())
    }
}

/// Reads an 8- or 16-bit gray or RGB PNG, mapping codes to `[0, 1]`.
pub fn load_png(path: &Path) -> Result<ImageBuf> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decode_err = |e: png::DecodingError| match e {
        png::DecodingError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    };
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(decode_err)?;
    let info = reader.info();
    let (color, depth) = (info.color_type, info.bit_depth);
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::UnsupportedImage {
                path: path.to_path_buf(),
                detail: format!("color type {other:?} (only gray and RGB are accepted)"),
            })
        }
    };
    let bytes_per_sample = match depth {
        png::BitDepth::Eight => 1,
        png::BitDepth::Sixteen => 2,
        other => {
            return Err(Error::UnsupportedImage {
                path: path.to_path_buf(),
                detail: format!("bit depth {other:?} (only 8 and 16 are accepted)"),
            })
        }
    };
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        path: path.to_path_buf(),
        detail: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(decode_err)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let line = frame.line_size;
    let mut pixels = vec![0f32; channels * h * w];
    for y in 0..h {
        let row = &buf[y * line..y * line + w * channels * bytes_per_sample];
        for x in 0..w {
            for c in 0..channels {
                let i = (x * channels + c) * bytes_per_sample;
                let v = if bytes_per_sample == 1 {
                    row[i] as f32 / 255.0
                } else {
                    u16::from_be_bytes([row[i], row[i + 1]]) as f32 / 65535.0
                };
                pixels[(c * h + y) * w + x] = v;
            }
        }
    }
    ImageBuf::new(channels, h, w, pixels).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

/// Writes an 8-bit PNG, clamping to `[0, 1]` and rounding half up.
pub fn save_png(img: &ImageBuf, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let (h, w, c) = (img.height, img.width, img.channels);
    let mut encoder = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    encoder.set_color(if c == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut data = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                data.push(quantize(img.get(ch, y, x)));
            }
        }
    }
    let enc_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    };
    let mut writer = encoder.write_header().map_err(enc_err)?;
    writer.write_image_data(&data).map_err(enc_err)?;
    writer.finish().map_err(enc_err)
}

/// `[0, 1]` → 8-bit code, round half up.
pub fn quantize(v: f32) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_half_up() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(2.0), 255);
        assert_eq!(quantize(-1.0), 0);
        assert_eq!(quantize(0.5 / 255.0), 1);
        assert_eq!(quantize(0.49 / 255.0), 0);
    }

    #[test]
    fn tiny_images_rejected() {
        assert!(ImageBuf::filled(3, 7, 8, 0.0).is_err());
        assert!(ImageBuf::filled(2, 8, 8, 0.0).is_err());
        assert!(ImageBuf::filled(1, 8, 8, 0.0).is_ok());
    }

    #[test]
    fn crop_border_and_multiple() {
        let img = ImageBuf::filled(3, 21, 19, 0.5).unwrap();
        let c = img.crop_to_multiple(4).unwrap();
        assert_eq!((c.height(), c.width()), (20, 16));
        let b = c.crop_border(2).unwrap();
        assert_eq!((b.height(), b.width()), (16, 12));
    }
}
