mod common;

use common::tiny_gr;
use onsr::imaging::Rng;
use onsr::models::init::he_std;
use onsr::models::{dl_forward, dl_forward_tape, dl_init, gr_forward, gr_init, load_params, save_params, DlConfig, GrConfig, ModelParams, FORMAT_VERSION};
use onsr::numcore::{Tape, Tensor};
use onsr::Error;
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(seed: u64, shape: &[usize]) -> Tensor {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    Tensor::from_vec(shape.to_vec(), (0..n).map(|_| r.random_range(0.0..1.0)).collect()).unwrap()
}

#[test]
fn lite_x4_maps_32_to_128() {
    let cfg = GrConfig::lite(4);
    let p = gr_init(&cfg, &Rng::new(0)).unwrap();
    assert_eq!(gr_forward(&cfg, &p, &random(0, &[3, 32, 32])).unwrap().shape(), &[3, 128, 128]);
}

#[test]
fn init_is_deterministic_and_outputs_zero() {
    let cfg = tiny_gr(2);
    let (a, b) = (gr_init(&cfg, &Rng::new(5)).unwrap(), gr_init(&cfg, &Rng::new(5)).unwrap());
    assert_eq!(a.value_bytes(), b.value_bytes());
    assert_ne!(a.value_bytes(), gr_init(&cfg, &Rng::new(6)).unwrap().value_bytes());
    let y = gr_forward(&cfg, &a, &random(1, &[3, 16, 16])).unwrap();
    assert!(y.data().iter().all(|&v| v == 0.0));
}

#[test]
fn perturbed_network_is_reproducible() {
    let cfg = tiny_gr(2);
    let mut p = gr_init(&cfg, &Rng::new(5)).unwrap();
    p.get_mut("conv_last.weight").unwrap().data_mut().iter_mut().enumerate().for_each(|(i, v)| *v = (i % 7) as f32 * 0.01);
    let x = random(2, &[3, 16, 16]);
    let (a, b) = (gr_forward(&cfg, &p, &x).unwrap(), gr_forward(&cfg, &p, &x).unwrap());
    assert_eq!(a.data(), b.data());
    assert!(a.data().iter().any(|&v| v != 0.0));
}

#[test]
fn init_std_tracks_fan_in() {
    let cfg = DlConfig::default();
    let p = dl_init(&cfg, &Rng::new(3), "dl").unwrap();
    let w = p.get("conv2.weight").unwrap();
    assert!(w.numel() >= 10_000);
    let n = w.numel() as f64;
    let mean = w.data().iter().map(|&v| v as f64).sum::<f64>() / n;
    let std = (w.data().iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n).sqrt();
    let target = he_std(w.shape());
    assert!((std / target - 1.0).abs() < 0.2, "{std} vs {target}");
}

#[test]
fn discriminator_batches_and_zero_weights() {
    let cfg = DlConfig::default();
    let p = dl_init(&cfg, &Rng::new(1), "dl").unwrap();
    let batch = random(4, &[3, 3, 32, 32]);
    let all = dl_forward(&cfg, &p, &batch).unwrap();
    assert_eq!(all.shape(), &[3]);
    for i in 0..3 {
        let one = dl_forward(&cfg, &p, &batch.batch_item(i).unwrap()).unwrap();
        assert!((one.data()[0] - all.data()[i]).abs() < 1e-5);
    }
    let mut z = p.clone();
    z.iter_mut().for_each(|(_, t)| t.data_mut().iter_mut().for_each(|v| *v = 0.0));
    assert!(dl_forward(&cfg, &z, &batch).unwrap().data().iter().all(|&v| v == 0.0));
    assert!(dl_forward(&cfg, &p, &random(0, &[1, 3, 30, 30])).is_err());
}

#[test]
fn discriminator_input_gradient_matches_finite_differences() {
    let cfg = DlConfig::default();
    let p = dl_init(&cfg, &Rng::new(2), "dl").unwrap();
    let x = random(7, &[1, 3, 32, 32]);
    // Unit-norm direction: a short step crosses almost no leaky-ReLU kinks.
    let dir = random(8, &[1, 3, 32, 32]).map(|v| v - 0.5);
    let norm = dir.data().iter().map(|v| v * v).sum::<f32>().sqrt();
    let dir = dir.map(|v| v / norm);
    let logit = |x: &Tensor| dl_forward(&cfg, &p, x).unwrap().data()[0] as f64;
    let mut tape = Tape::new();
    let vars = p.record(&mut tape, false);
    let xv = tape.variable(&x);
    let out = dl_forward_tape(&mut tape, &cfg, &vars, xv).unwrap();
    let grads = tape.backward(out).unwrap();
    let g = grads.get(xv).unwrap();
    let analytic: f64 = g.iter().zip(dir.data()).map(|(a, b)| *a as f64 * *b as f64).sum();
    let h = 1e-2f32;
    let shift = |s: f32| Tensor::from_vec(x.shape().to_vec(), x.data().iter().zip(dir.data()).map(|(a, d)| a + s * d).collect()).unwrap();
    let numeric = (logit(&shift(h)) - logit(&shift(-h))) / (2.0 * h as f64);
    assert!((analytic - numeric).abs() <= 1e-3 * analytic.abs().max(numeric.abs()), "{analytic} vs {numeric}");
}

#[test]
fn model_files_round_trip_and_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let p = gr_init(&tiny_gr(4), &Rng::new(1)).unwrap();
    let path = dir.path().join("m.bin");
    save_params(&p, &path).unwrap();
    let back = load_params(&path).unwrap();
    assert_eq!(back.value_bytes(), p.value_bytes());
    assert_eq!(GrConfig::infer(&back).unwrap(), tiny_gr(4));

    let mut bytes = p.to_bytes().unwrap();
    bytes[4..6].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    let err = ModelParams::from_bytes(&bytes).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains(&(FORMAT_VERSION + 1).to_string()) && msg.contains(&FORMAT_VERSION.to_string()), "{msg}");
    bytes[0] = b'X';
    assert!(matches!(ModelParams::from_bytes(&bytes), Err(Error::NotAModel)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn output_extent_is_scaled(h in 16usize..65, w in 16usize..65, s in prop::sample::select(vec![2usize, 4])) {
        let cfg = GrConfig { num_blocks: 1, base_channels: 4, growth_channels: 2, dense_layers: 1, residual_scale: 0.2, scale: s };
        let p = gr_init(&cfg, &Rng::new(0)).unwrap();
        let y = gr_forward(&cfg, &p, &Tensor::zeros(vec![3, h, w])).unwrap();
        prop_assert_eq!(y.shape(), &[3, s * h, s * w]);
    }
}
