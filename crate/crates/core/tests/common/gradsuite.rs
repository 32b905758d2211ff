//! Finite-difference checks of every differentiable tape operation.

use onsr::numcore::{Direction, Padding, Tape, Tensor, Var};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::gradcheck;

pub const STEP: f64 = 1e-6;

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape.to_vec(), (0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Values kept at least `gap` away from zero so kinks are never crossed.
fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize], gap: f64) -> Tensor<f64> {
    let mut t = uniform(rng, shape, -1.0, 1.0);
    for v in t.data_mut() {
        *v = v.signum() * (v.abs() + gap);
    }
    t
}

type Case = fn(u64) -> f64;

fn conv(seed: u64, padding: Padding, stride: usize, bias: bool) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let (b, c, o) = (r.random_range(1..3), r.random_range(1..3), r.random_range(1..3));
    let k = [1, 3, 5][r.random_range(0..3)];
    let (h, w) = (r.random_range(k.max(3)..8), r.random_range(k.max(3)..8));
    let mut inputs = vec![uniform(&mut r, &[b, c, h, w], -1.0, 1.0), uniform(&mut r, &[o, c, k, k], -1.0, 1.0)];
    if bias {
        inputs.push(uniform(&mut r, &[o], -1.0, 1.0));
    }
    let probe = uniform(&mut r, &[1], 0.5, 1.5).data()[0];
    gradcheck(
        &inputs,
        &move |t: &mut Tape<f64>, v: &[Var]| {
            let y = t.conv2d(v[0], v[1], v.get(2).copied(), padding, stride).unwrap();
            // A non-linear read-out so every output position matters differently.
            let z = t.leaky_relu(y, 0.2);
            let z = t.scalar_mul(z, probe);
            let zz = t.add(z, y).unwrap();
            t.mean(zz)
        },
        STEP,
    )
}

/// Smooth read-out `w · y` with fixed random weights.
fn weighted_sum(t: &mut Tape<f64>, y: Var, seed: u64) -> Var {
    let shape = t.shape(y).to_vec();
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let w = uniform(&mut r, &shape, -1.0, 1.0);
    let wv = t.constant(&w);
    let n = shape.iter().product::<usize>();
    let flat = t.reshape(y, vec![1, n]).unwrap();
    let wf = t.reshape(wv, vec![1, n]).unwrap();
    let out = t.linear(flat, wf, None).unwrap();
    t.mean(out)
}

fn resample(seed: u64, direction: Direction) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let factor = [2, 4][r.random_range(0..2)];
    let (h, w) = match direction {
        Direction::Down => (factor * r.random_range(1..4), factor * r.random_range(1..4)),
        Direction::Up => (r.random_range(1..5), r.random_range(1..5)),
    };
    let c = r.random_range(1..3);
    let x = uniform(&mut r, &[c, h, w], -1.0, 1.0);
    gradcheck(
        &[x],
        &move |t: &mut Tape<f64>, v: &[Var]| {
            let y = t.bicubic_resample(v[0], factor, direction).unwrap();
            weighted_sum(t, y, seed)
        },
        STEP,
    )
}

fn leaky(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let x = away_from_zero(&mut r, &[2, 3, 4], 1e-3);
    gradcheck(
        &[x],
        &move |t: &mut Tape<f64>, v: &[Var]| {
            let y = t.leaky_relu(v[0], 0.2);
            weighted_sum(t, y, seed)
        },
        STEP,
    )
}

fn arithmetic(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let a = uniform(&mut r, &[2, 5], -1.0, 1.0);
    let b = uniform(&mut r, &[2, 5], -1.0, 1.0);
    let f = r.random_range(-2.0..2.0);
    gradcheck(
        &[a, b],
        &move |t: &mut Tape<f64>, v: &[Var]| {
            let s = t.add(v[0], v[1]).unwrap();
            let d = t.sub(s, v[1]).unwrap();
            let d = t.sub(d, v[1]).unwrap();
            let m = t.scalar_mul(d, f);
            let m = t.add(m, v[0]).unwrap();
            weighted_sum(t, m, seed)
        },
        STEP,
    )
}

fn mean(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let x = uniform(&mut r, &[3, 4], -1.0, 1.0);
    gradcheck(&[x], &|t: &mut Tape<f64>, v: &[Var]| t.mean(v[0]), STEP)
}

fn l1(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let a = uniform(&mut r, &[2, 3, 4], -1.0, 1.0);
    let gap = away_from_zero(&mut r, &[2, 3, 4], 1e-2);
    let b = Tensor::from_vec(
        a.shape().to_vec(),
        a.data().iter().zip(gap.data()).map(|(x, g)| x + g).collect(),
    )
    .unwrap();
    gradcheck(&[a, b], &|t: &mut Tape<f64>, v: &[Var]| t.l1_loss(v[0], v[1]).unwrap(), STEP)
}

fn bce(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let z = uniform(&mut r, &[6], -6.0, 6.0);
    let target = (seed % 2) as f64;
    gradcheck(
        &[z],
        &move |t: &mut Tape<f64>, v: &[Var]| t.bce_with_logits(v[0], target).unwrap(),
        STEP,
    )
}

fn shape_ops(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let a = uniform(&mut r, &[2, 1, 3, 3], -1.0, 1.0);
    let b = uniform(&mut r, &[2, 2, 3, 3], -1.0, 1.0);
    let factor = r.random_range(1..4);
    gradcheck(
        &[a, b],
        &move |t: &mut Tape<f64>, v: &[Var]| {
            let c = t.concat_channels(&[v[0], v[1], v[0]]).unwrap();
            let u = t.upsample_nearest(c, factor).unwrap();
            let s = 3 * factor;
            let flat = t.reshape(u, vec![2, 4, s, s]).unwrap();
            weighted_sum(t, flat, seed)
        },
        STEP,
    )
}

fn linear(seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let (b, f, o) = (r.random_range(1..4), r.random_range(1..6), r.random_range(1..4));
    let x = uniform(&mut r, &[b, f], -1.0, 1.0);
    let w = uniform(&mut r, &[o, f], -1.0, 1.0);
    let bias = uniform(&mut r, &[o], -1.0, 1.0);
    gradcheck(
        &[x, w, bias],
        &move |t: &mut Tape<f64>, v: &[Var]| {
            let y = t.linear(v[0], v[1], Some(v[2])).unwrap();
            let z = t.bce_with_logits(y, 1.0).unwrap();
            let q = t.scalar_mul(y, 0.5);
            let m = t.mean(q);
            t.add(z, m).unwrap()
        },
        STEP,
    )
}

/// `(name, case)` for every differentiable operation.
pub fn cases() -> Vec<(&'static str, Case)> {
    vec![
        ("conv2d zero", |s| conv(s, Padding::Zero, 1, true)),
        ("conv2d reflect", |s| conv(s, Padding::Reflect, 1, false)),
        ("conv2d stride 2", |s| conv(s, Padding::Zero, 2, true)),
        ("bicubic down", |s| resample(s, Direction::Down)),
        ("bicubic up", |s| resample(s, Direction::Up)),
        ("leaky_relu", leaky),
        ("add/sub/scalar_mul", arithmetic),
        ("mean", mean),
        ("l1_loss", l1),
        ("bce_with_logits", bce),
        ("concat/upsample/reshape", shape_ops),
        ("linear", linear),
    ]
}
