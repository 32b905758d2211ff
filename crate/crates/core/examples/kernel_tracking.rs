//! Follows the learned kernel during adaptation, with and without the
//! adversarial term, and prints every 50 steps its correlation with the
//! true kernel, its spread and the share of its mass on negative taps.
//!
//! Usage: `kernel_tracking [steps] [init.bin]`.

use onsr::degradation::{degrade, ncc, synth_kernel, DegradationSpec, Kernel2D, SynthOptions};
use onsr::imaging::{synthetic, Rng, Stream};
use onsr::models::{gr_init, GrConfig, ModelParams};
use onsr::trainer::{pretrain_gr, PretrainConfig, Session, TrainConfig};

/// Mean squared distance from the centroid, weighted by `|tap|`.
fn spread(k: &Kernel2D) -> f64 {
    let (cy, cx) = k.centroid();
    let r = (k.size() / 2) as f64;
    let (mut s, mut w) = (0.0, 0.0);
    for y in 0..k.size() {
        for x in 0..k.size() {
            let a = k.at(y, x).abs();
            s += a * ((y as f64 - r - cy).powi(2) + (x as f64 - r - cx).powi(2));
            w += a;
        }
    }
    s / w
}

fn negative_mass(k: &Kernel2D) -> f64 {
    let neg = k.taps().iter().filter(|&&v| v < 0.0).fold(0.0, |a, v| a - v);
    neg / k.taps().iter().map(|v| v.abs()).sum::<f64>()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps = args.first().map_or(150, |s| s.parse().unwrap());
    let pool = synthetic::scene_set(99, 8, 128, 128).unwrap();
    let (cfg, gr) = match args.get(1) {
        Some(p) => {
            let params = ModelParams::load(p.as_ref()).unwrap();
            (GrConfig::infer(&params).unwrap(), params)
        }
        None => {
            let cfg = GrConfig::lite(2);
            let init = gr_init(&cfg, &Rng::new(1)).unwrap();
            let pcfg = PretrainConfig { steps: 100, n_patches: 4, lr_patch: 24, lr: 4e-4, seed: 0 };
            (cfg, pretrain_gr(&pool, &cfg, init, &pcfg).unwrap().params)
        }
    };
    let hr = synthetic::scene_set(601, 1, 160, 160).unwrap().remove(0);
    let rng = Rng::new(3);
    let (kernel, _) = synth_kernel(&mut rng.substream(Stream::Kernel), SynthOptions::for_scale(cfg.scale)).unwrap();
    let lr = degrade(&hr, &DegradationSpec::new(kernel.clone(), cfg.scale, 0.0).unwrap(), &mut rng.substream(Stream::Noise)).unwrap();
    println!("true kernel spread {:.3}", spread(&kernel));

    for lambda in [1.0, 0.0] {
        let tcfg = TrainConfig { steps, test_interval: steps, n_patches: 2, lambda_gan: lambda, seed: 5, ..Default::default() };
        let mut session = Session::new(&lr, &pool, cfg, gr.clone(), tcfg).unwrap();
        println!("lambda {lambda}");
        for step in 0..=steps {
            if step % 50 == 0 || step == steps {
                let k = session.degrader().kernel_estimate().unwrap();
                println!(
                    "  step {step:>4}: NCC {:.3}, spread {:.3}, negative mass {:.3}",
                    ncc(&k, &kernel).unwrap(),
                    spread(&k),
                    negative_mass(&k)
                );
            }
            if step < steps {
                session.step().unwrap();
            }
        }
    }
}
