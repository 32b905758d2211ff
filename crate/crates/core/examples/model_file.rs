//! Writes a reconstructor and a degradation network to model files, reads
//! them back and checks the round trip is bit-exact.

use onsr::degradation::gd_init;
use onsr::imaging::Rng;
use onsr::models::{gr_init, GrConfig, ModelParams};

fn main() {
    let dir = std::env::temp_dir();
    let cfg = GrConfig::lite(4);
    let gr = gr_init(&cfg, &Rng::new(5)).unwrap();
    let gd = gd_init(4, &mut Rng::new(0)).unwrap().to_params();
    for (name, p) in [("gr", &gr), ("gd", &gd)] {
        let path = dir.join(format!("onsr_{name}.bin"));
        p.save(&path).unwrap();
        let back = ModelParams::load(&path).unwrap();
        let bytes = std::fs::metadata(&path).unwrap().len();
        println!(
            "{name}: role {}, {} tensors, {} values, {bytes} bytes, exact round trip {}",
            back.role().label(),
            back.len(),
            back.count(),
            back.value_bytes() == p.value_bytes()
        );
    }
    println!("inferred config: {:?}", GrConfig::infer(&gr).unwrap());
}
