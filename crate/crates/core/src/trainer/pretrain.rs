//! Offline pretraining of the reconstructor on bicubic degradations.

use super::optim::AdamGroup;
use super::pool::ExternalPool;
use crate::degradation::bicubic_down;
use crate::error::{Error, Result};
use crate::imaging::{ImageBuf, Rng, Stream};
use crate::models::{check_params, gr_forward_tape, GrConfig, ModelParams};
use crate::numcore::Tape;

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainConfig {
    pub steps: usize,
    pub n_patches: usize,
    /// LR patch extent; HR patches are `scale` times larger.
    pub lr_patch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            n_patches: 8,
            lr_patch: 32,
            lr: 2e-4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PretrainOutcome {
    pub params: ModelParams,
    /// L1 loss of every step, measured before that step's update.
    pub losses: Vec<f64>,
}

/// Minimizes `L1(x, G_r(bicubic_down(x)))` over random HR patches, starting
/// from `init`.
pub fn pretrain_gr(
    hr_pool: &[ImageBuf],
    gr_cfg: &GrConfig,
    init: ModelParams,
    cfg: &PretrainConfig,
) -> Result<PretrainOutcome> {
    check_params(gr_cfg, &init)?;
    if cfg.n_patches == 0 || cfg.lr_patch < 8 {
        return Err(Error::Config(format!(
            "pretraining needs at least one patch of extent >= 8, got {} of {}",
            cfg.n_patches, cfg.lr_patch
        )));
    }
    let s = gr_cfg.scale;
    let pool = ExternalPool::new(hr_pool, s * cfg.lr_patch, None)?;
    let mut rng = Rng::new(cfg.seed).keyed(Stream::Patches, "pretrain");
    let mut params = init;
    let mut opt = AdamGroup::new(params.iter().map(|(_, t)| t), cfg.lr);
    let mut losses = Vec::with_capacity(cfg.steps);
    for step in 1..=cfg.steps {
        let x = pool.sample(cfg.n_patches, &mut rng)?;
        let y = bicubic_down(&x, s)?;
        let mut tape = Tape::new();
        let vars = params.record(&mut tape, true);
        let (yv, xv) = (tape.constant(&y), tape.constant(&x));
        let sr = gr_forward_tape(&mut tape, gr_cfg, &vars, yv)?;
        let loss = tape.l1_loss(sr, xv)?;
        let value = tape.item(loss)?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                step,
                loss: "l1".into(),
            });
        }
        losses.push(value as f64);
        let grads = tape.backward(loss)?;
        params.zero_grads();
        params.accumulate_grads(&grads, &vars)?;
        opt.step(params.iter_mut().map(|(_, t)| t))?;
    }
    params.clear_grads();
    Ok(PretrainOutcome { params, losses })
}
