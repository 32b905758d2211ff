//! Draws random anisotropic blur kernels and writes them as CSV and PGM.
//!
//! Usage: `synth_kernels [out_dir]` (default: a temporary directory).

use onsr::degradation::{synth_kernel, SynthOptions};
use onsr::imaging::{Rng, Stream};

fn main() {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("onsr_kernels"), Into::into);
    std::fs::create_dir_all(&out).unwrap();
    let mut rng = Rng::new(7).substream(Stream::Kernel);
    for i in 0..4 {
        let scale = if i < 2 { 2 } else { 4 };
        let (k, shape) = synth_kernel(&mut rng, SynthOptions::for_scale(scale)).unwrap();
        k.save_csv(&out.join(format!("k{i}.csv"))).unwrap();
        k.save_pgm(&out.join(format!("k{i}.pgm"))).unwrap();
        let (cy, cx) = k.centroid();
        println!(
            "k{i}: {}x{} for x{scale}, lambda ({:.2}, {:.2}), theta {:+.2}, centroid ({cy:.2}, {cx:.2})",
            k.size(),
            k.size(),
            shape.lambda1,
            shape.lambda2,
            shape.theta
        );
    }
    println!("written to {}", out.display());
}
