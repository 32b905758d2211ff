//! The degradation network is three linear convolutions; its effective blur
//! is read off with an impulse. Here the layers are set by hand and the
//! extracted kernel is compared with the blur applied explicitly.

use onsr::degradation::{effective_kernel, gd_forward, gd_init, layer_extents, min_support, ncc, GdNet, Kernel2D};
use onsr::imaging::Rng;

fn main() {
    let init = gd_init(2, &mut Rng::new(0)).unwrap();
    let k0 = effective_kernel(&init, min_support(2).unwrap()).unwrap();
    println!("init: {}x{} kernel, centre tap {:.4}", k0.size(), k0.size(), k0.at(k0.size() / 2, k0.size() / 2));

    let [a, b, c] = layer_extents(2).unwrap();
    let layers = [
        Kernel2D::gaussian(a, 0.6).unwrap(),
        Kernel2D::gaussian(b, 1.5).unwrap(),
        Kernel2D::delta(c).unwrap(),
    ];
    let net = GdNet::from_kernels(2, layers).unwrap();
    let k = effective_kernel(&net, min_support(2).unwrap()).unwrap();
    let wanted = Kernel2D::gaussian(k.size(), (0.36f64 + 2.25).sqrt()).unwrap();
    println!("hand-set layers: NCC with a sigma={:.3} Gaussian {:.5}", (2.61f64).sqrt(), ncc(&k, &wanted).unwrap());

    let x = onsr::imaging::synthetic::scene_set(2, 1, 64, 64).unwrap().remove(0).to_tensor();
    let y = gd_forward(&net, &x).unwrap();
    println!("forward: {:?} -> {:?}", x.shape(), y.shape());
}
