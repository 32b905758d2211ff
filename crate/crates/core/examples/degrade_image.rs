//! Blurs, downsamples and adds noise to an image.
//!
//! Usage: `degrade_image [hr.png] [out.png]`. Without arguments a synthetic
//! scene is degraded and the result goes to the temporary directory.

use onsr::degradation::{degrade, synth_kernel, DegradationSpec, SynthOptions};
use onsr::imaging::{load_png, save_png, synthetic, Rng, Stream};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let hr = match args.first() {
        Some(p) => load_png(p.as_ref()).unwrap().crop_to_multiple(4).unwrap(),
        None => synthetic::scene_set(1, 1, 128, 128).unwrap().remove(0),
    };
    let out = args.get(1).map_or_else(|| std::env::temp_dir().join("onsr_lr.png"), Into::into);
    let rng = Rng::new(11);
    let (kernel, _) = synth_kernel(&mut rng.substream(Stream::Kernel), SynthOptions::for_scale(4)).unwrap();
    let spec = DegradationSpec::new(kernel, 4, 0.01).unwrap();
    let lr = degrade(&hr, &spec, &mut rng.substream(Stream::Noise)).unwrap();
    save_png(&lr, &out).unwrap();
    println!("{}x{} -> {}x{}, saved {}", hr.height(), hr.width(), lr.height(), lr.width(), out.display());
}
