//! Downscales a synthetic scene by 2 and 4 and upscales it back, printing
//! the round-trip PSNR.

use onsr::imaging::{psnr, synthetic, ImageBuf};
use onsr::numcore::{bicubic_resample, Direction};

fn main() {
    let hr = synthetic::scene_set(3, 1, 96, 96).unwrap().remove(0);
    for s in [2, 4] {
        let down = bicubic_resample(&hr.to_tensor(), s, Direction::Down).unwrap();
        let up = bicubic_resample(&down, s, Direction::Up).unwrap();
        let back = ImageBuf::from_tensor(&up, true).unwrap();
        println!(
            "x{s}: {:?} -> {:?}, round trip PSNR {:.2} dB",
            hr.to_tensor().shape(),
            down.shape(),
            psnr(&back, &hr, s).unwrap()
        );
    }
}
