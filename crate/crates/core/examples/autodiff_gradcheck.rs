//! Differentiates a small conv + leaky-ReLU + L1 graph and compares the
//! tape gradient with central differences in 64-bit mode.

use onsr::numcore::{Padding, Tape, Tensor};

fn loss(x: &Tensor<f64>, w: &Tensor<f64>, target: &Tensor<f64>) -> f64 {
    let mut tape = Tape::new();
    let (xv, wv, tv) = (tape.constant(x), tape.constant(w), tape.constant(target));
    let y = tape.conv2d(xv, wv, None, Padding::Reflect, 1).unwrap();
    let y = tape.leaky_relu(y, 0.2);
    let l = tape.l1_loss(y, tv).unwrap();
    tape.item(l).unwrap()
}

fn main() {
    let x = Tensor::from_vec(vec![1, 5, 5], (0..25).map(|i| ((i * 7) % 11) as f64 / 11.0).collect()).unwrap();
    let w = Tensor::from_vec(vec![2, 1, 3, 3], (0..18).map(|i| ((i * 5) % 7) as f64 / 7.0 - 0.4).collect()).unwrap();
    let target = Tensor::full(vec![2, 5, 5], 0.3);

    let mut tape = Tape::new();
    let (xv, wv, tv) = (tape.constant(&x), tape.variable(&w), tape.constant(&target));
    let y = tape.conv2d(xv, wv, None, Padding::Reflect, 1).unwrap();
    let y = tape.leaky_relu(y, 0.2);
    let l = tape.l1_loss(y, tv).unwrap();
    println!("loss {:.6}", tape.item(l).unwrap());
    let grads = tape.backward(l).unwrap();
    let g = grads.get(wv).unwrap().to_vec();

    let h = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..w.numel() {
        let (mut p, mut m) = (w.clone(), w.clone());
        p.data_mut()[i] += h;
        m.data_mut()[i] -= h;
        let fd = (loss(&x, &p, &target) - loss(&x, &m, &target)) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs() / 1f64.max(g[i].abs()).max(fd.abs()));
    }
    println!("{} weight gradients, worst relative error vs finite differences {worst:.2e}", w.numel());
}
