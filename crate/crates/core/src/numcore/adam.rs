use super::{Scalar, Tensor};
use crate::error::{ensure, Result};

/// Hyperparameters shared by every parameter of one optimizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates of a single parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(numel: usize, config: AdamConfig) -> Self {
        Self {
            config,
            m: vec![0.0; numel],
            v: vec![0.0; numel],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `param` from its accumulated gradient.
///
/// Moments are kept in `f64`. The gradient is left in place; callers zero it.
pub fn adam_step<T: Scalar>(param: &mut Tensor<T>, state: &mut AdamState) -> Result<()> {
    ensure!(
        state.m.len() == param.numel(),
        "optimizer state sized for {} entries, parameter has {}",
        state.m.len(),
        param.numel()
    );
    let grad: Vec<f64> = match param.grad() {
        Some(g) => g.iter().map(|v| v.as_f64()).collect(),
        None => return Err(crate::error::contract!("adam_step on a parameter without gradient")),
    };
    let c = state.config;
    state.t += 1;
    let bc1 = 1.0 - c.beta1.powi(state.t as i32);
    let bc2 = 1.0 - c.beta2.powi(state.t as i32);
    let data = param.data_mut();
    for i in 0..data.len() {
        let g = grad[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        let step = c.lr * m_hat / (v_hat.sqrt() + c.eps);
        if step != 0.0 {
            data[i] = T::of_f64(data[i].as_f64() - step);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameter() {
        let mut p = Tensor::from_vec(vec![3], vec![0.5f32, -1.0, 2.0]).unwrap().with_grad();
        let before = p.clone();
        let mut s = AdamState::new(3, AdamConfig::default());
        adam_step(&mut p, &mut s).unwrap();
        assert_eq!(p.data(), before.data());
        assert!(s.m.iter().chain(&s.v).all(|&x| x == 0.0));
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = Tensor::from_vec(vec![4], vec![0.0f64, 1.0, -1.0, 3.0]).unwrap().with_grad();
        p.accumulate_grad(&[0.3, -2.0, 5.0, -0.01]).unwrap();
        let before = p.data().to_vec();
        let mut s = AdamState::new(4, AdamConfig::with_lr(1e-4));
        adam_step(&mut p, &mut s).unwrap();
        for ((a, b), g) in p.data().iter().zip(&before).zip([0.3, -2.0, 5.0, -0.01]) {
            let delta = a - b;
            assert!((delta + 1e-4 * f64::signum(g)).abs() < 1e-7, "delta {delta}");
        }
        assert_eq!(p.grad().unwrap(), &[0.3, -2.0, 5.0, -0.01]);
    }

    #[test]
    fn missing_gradient_rejected() {
        let mut p = Tensor::<f32>::zeros(vec![2]);
        let mut s = AdamState::new(2, AdamConfig::default());
        assert!(adam_step(&mut p, &mut s).is_err());
    }

    #[test]
    fn quadratic_descends_monotonically() {
        let mut w = Tensor::from_vec(vec![1], vec![1.0f64]).unwrap().with_grad();
        let mut s = AdamState::new(1, AdamConfig::with_lr(0.1));
        let mut f_prev = 1.0;
        for _ in 0..10 {
            w.zero_grad();
            let x = w.data()[0];
            w.accumulate_grad(&[2.0 * x]).unwrap();
            adam_step(&mut w, &mut s).unwrap();
            let x = w.data()[0];
            assert!(x * x < f_prev);
            f_prev = x * x;
        }
        assert!(w.data()[0].abs() < 1.0);
        assert_eq!(s.t, 10);
    }
}
