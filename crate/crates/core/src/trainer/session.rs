//! One online adaptation session on one low-resolution image.

use std::time::Instant;

use serde::Serialize;

use super::config::{Mode, TrainConfig, Variant};
use super::losses::{record_d_loss, record_g_loss, record_loss_eb, record_loss_ib};
use super::optim::AdamGroup;
use super::pool::ExternalPool;
use crate::degradation::{effective_kernel, gd_forward_tape, gd_init, min_support, GdNet, Kernel2D};
use crate::error::{ensure, Error, Result};
use crate::imaging::{gather_patches, psnr, sample_offsets, ssim_with, ImageBuf, MetricOptions, Rng, Stream};
use crate::models::{check_params, dl_init, gr_forward, gr_forward_tape, DlConfig, GrConfig, ModelParams};
use crate::numcore::{Tape, Tensor, Var};

/// The degradation the external branch uses.
#[derive(Clone, Debug, PartialEq)]
pub enum Degrader {
    Learned(GdNet),
    /// Ground-truth blur followed by bicubic downscaling.
    Fixed { kernel: Kernel2D, scale: usize },
}

impl Degrader {
    pub fn scale(&self) -> usize {
        match self {
            Degrader::Learned(net) => net.scale(),
            Degrader::Fixed { scale, .. } => *scale,
        }
    }

    fn record(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        match self {
            Degrader::Learned(net) => net.record(tape, trainable).to_vec(),
            Degrader::Fixed { kernel, .. } => vec![tape.constant(&kernel.to_tensor())],
        }
    }

    /// The effective kernel of a learned network, or the fixed kernel.
    pub fn kernel_estimate(&self) -> Result<Kernel2D> {
        match self {
            Degrader::Learned(net) => effective_kernel(net, min_support(net.scale())?),
            Degrader::Fixed { kernel, .. } => Ok(kernel.clone()),
        }
    }

    pub fn learned(&self) -> Option<&GdNet> {
        match self {
            Degrader::Learned(net) => Some(net),
            Degrader::Fixed { .. } => None,
        }
    }
}

/// Sub-step of one update, reported to observers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Degradation network stepped on the internal (and adversarial) loss.
    Degradation,
    /// Reconstruction network stepped.
    Reconstruction,
    /// Low-resolution discriminator stepped.
    Discriminator,
    /// High-resolution discriminator stepped.
    HrDiscriminator,
    /// All networks stepped together.
    Joint,
}

/// One line of the metrics log. Losses a configuration does not compute
/// are left out.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_ib: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_eb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_gan_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_gan_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms_elapsed: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub image: ImageBuf,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
}

struct Discriminator {
    cfg: DlConfig,
    params: ModelParams,
    opt: AdamGroup,
}

impl Discriminator {
    fn new(cfg: DlConfig, rng: &Rng, tag: &str, lr: f64) -> Result<Self> {
        let params = dl_init(&cfg, rng, tag)?;
        let opt = AdamGroup::new(params.iter().map(|(_, t)| t), lr);
        Ok(Self { cfg, params, opt })
    }
}

pub struct Session {
    cfg: TrainConfig,
    gr_cfg: GrConfig,
    lr: Tensor,
    hr_gt: Option<ImageBuf>,
    pool: ExternalPool,
    gr: ModelParams,
    gr_opt: AdamGroup,
    degrader: Degrader,
    gd_opt: Option<AdamGroup>,
    dl: Option<Discriminator>,
    dh: Option<Discriminator>,
    patch_rng: Rng,
    pool_rng: Rng,
    step: usize,
    log: Vec<StepRecord>,
    checkpoints: Vec<Checkpoint>,
    started: Instant,
}

fn finite(v: f32, step: usize, name: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v as f64)
    } else {
        Err(Error::NonFinite {
            step,
            loss: name.into(),
        })
    }
}

impl Session {
    /// Sets up a session: the degradation network starts from its Gaussian
    /// init (or the fixed ground truth in non-blind mode), discriminators
    /// from seeded random init.
    pub fn new(
        lr_image: &ImageBuf,
        hr_pool: &[ImageBuf],
        gr_cfg: GrConfig,
        gr_init: ModelParams,
        cfg: TrainConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        check_params(&gr_cfg, &gr_init)?;
        let s = gr_cfg.scale;
        ensure!(
            lr_image.height() >= cfg.lr_patch && lr_image.width() >= cfg.lr_patch,
            "LR image {}x{} is smaller than the {}x{} patch",
            lr_image.height(),
            lr_image.width(),
            cfg.lr_patch,
            cfg.lr_patch
        );
        let pool = ExternalPool::new(hr_pool, s * cfg.lr_patch, cfg.external_limit)?;
        let root = Rng::new(cfg.seed);
        let (degrader, gd_opt) = if cfg.blind {
            let net = gd_init(s, &mut root.substream(Stream::Init))?;
            let opt = (cfg.variant.trains_gd()).then(|| AdamGroup::new(net.layers().iter(), cfg.lr_gd));
            (Degrader::Learned(net), opt)
        } else {
            let kernel = cfg.gt_kernel.clone().expect("validated");
            (Degrader::Fixed { kernel, scale: s }, None)
        };
        let adversarial = cfg.blind && cfg.variant.lr_discriminator();
        let dl = adversarial
            .then(|| Discriminator::new(DlConfig::for_input(cfg.lr_patch), &root, "dl", cfg.lr_dl))
            .transpose()?;
        let dh = (cfg.blind && cfg.variant.hr_discriminator())
            .then(|| Discriminator::new(DlConfig::for_input(s * cfg.lr_patch), &root, "dh", cfg.lr_dl))
            .transpose()?;
        let gr_opt = AdamGroup::new(gr_init.iter().map(|(_, t)| t), cfg.lr_gr);
        Ok(Self {
            lr: lr_image.to_rgb().to_tensor(),
            hr_gt: None,
            pool,
            gr: gr_init,
            gr_opt,
            degrader,
            gd_opt,
            dl,
            dh,
            patch_rng: root.substream(Stream::Patches),
            pool_rng: root.keyed(Stream::Patches, "external"),
            step: 0,
            log: Vec::new(),
            checkpoints: Vec::new(),
            started: Instant::now(),
            cfg,
            gr_cfg,
        })
    }

    /// Ground truth for PSNR/SSIM at test steps.
    pub fn with_ground_truth(mut self, hr: &ImageBuf) -> Result<Self> {
        let hr = hr.to_rgb();
        let s = self.gr_cfg.scale;
        let (h, w) = (self.lr.shape()[1], self.lr.shape()[2]);
        ensure!(
            hr.height() == s * h && hr.width() == s * w,
            "ground truth {}x{} does not match the x{s} output {}x{}",
            hr.height(),
            hr.width(),
            s * h,
            s * w
        );
        self.hr_gt = Some(hr);
        Ok(self)
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn gr(&self) -> &ModelParams {
        &self.gr
    }

    pub fn degrader(&self) -> &Degrader {
        &self.degrader
    }

    pub fn dl(&self) -> Option<&ModelParams> {
        self.dl.as_ref().map(|d| &d.params)
    }

    pub fn dh(&self) -> Option<&ModelParams> {
        self.dh.as_ref().map(|d| &d.params)
    }

    pub fn log(&self) -> &[StepRecord] {
        &self.log
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    /// Current reconstruction of the whole LR image, clamped to `[0, 1]`.
    pub fn reconstruct(&self) -> Result<ImageBuf> {
        let sr = gr_forward(&self.gr_cfg, &self.gr, &self.lr)?;
        ImageBuf::from_tensor(&sr, true)
    }

    fn score(&self, sr: &ImageBuf) -> Result<(Option<f64>, Option<f64>)> {
        match &self.hr_gt {
            Some(gt) => {
                let opts = MetricOptions::new(self.gr_cfg.scale, false);
                Ok((Some(psnr(sr, gt, opts.border_crop)?), Some(ssim_with(sr, gt, opts)?)))
            }
            None => Ok((None, None)),
        }
    }

    fn draw_batches(&mut self) -> Result<(Tensor, Tensor)> {
        let (h, w) = (self.lr.shape()[1], self.lr.shape()[2]);
        let p = self.cfg.lr_patch;
        let offsets = sample_offsets(h, w, self.cfg.n_patches, p, &mut self.patch_rng)?;
        let y = gather_patches(&self.lr, &offsets, p)?;
        let x = self.pool.sample(self.cfg.n_patches, &mut self.pool_rng)?;
        Ok((y, x))
    }

    /// One update.
    pub fn step(&mut self) -> Result<&StepRecord> {
        self.step_observed(&mut |_, _| {})
    }

    /// One update, calling `observer` after every phase.
    pub fn step_observed(&mut self, observer: &mut dyn FnMut(Phase, &Session)) -> Result<&StepRecord> {
        let index = self.step + 1;
        let (y, x) = self.draw_batches()?;
        let mut rec = StepRecord {
            step: index,
            ..Default::default()
        };
        match self.cfg.mode {
            Mode::Separate => self.separate_update(index, &y, &x, &mut rec, observer)?,
            Mode::Joint => {
                self.joint_update(index, &y, &x, &mut rec)?;
                observer(Phase::Joint, self);
            }
        }
        self.step = index;
        if index % self.cfg.test_interval == 0 {
            let image = self.reconstruct()?;
            let (p, s) = self.score(&image)?;
            rec.psnr = p;
            rec.ssim = s;
            self.checkpoints.push(Checkpoint {
                step: index,
                image,
                psnr: p,
                ssim: s,
            });
        }
        if self.cfg.record_timing {
            rec.ms_elapsed = Some(self.started.elapsed().as_secs_f64() * 1e3);
        }
        self.log.push(rec);
        Ok(self.log.last().expect("just pushed"))
    }

    fn gan_active(&self) -> bool {
        self.dl.is_some() && self.cfg.lambda_gan > 0.0
    }

    fn separate_update(
        &mut self,
        index: usize,
        y: &Tensor,
        x: &Tensor,
        rec: &mut StepRecord,
        observer: &mut dyn FnMut(Phase, &Session),
    ) -> Result<()> {
        let variant = self.cfg.variant;
        if variant.internal_branch() && self.gd_opt.is_some() {
            self.degradation_phase(index, y, x, rec)?;
            observer(Phase::Degradation, self);
        }
        let (ye, sr_y) = self.reconstruction_phase(index, y, x, rec)?;
        observer(Phase::Reconstruction, self);
        if let (Some(_), Some(ye)) = (&self.dl, &ye) {
            let d = self.discriminator_phase(index, false, y, ye)?;
            rec.l_gan_d = Some(d);
            observer(Phase::Discriminator, self);
        }
        if let (Some(_), Some(sr_y)) = (&self.dh, &sr_y) {
            self.discriminator_phase(index, true, x, sr_y)?;
            observer(Phase::HrDiscriminator, self);
        }
        Ok(())
    }

    /// Steps the degradation on `L_IB + λ·L_GAN`, with the reconstructor
    /// recorded as constants.
    fn degradation_phase(&mut self, index: usize, y: &Tensor, x: &Tensor, rec: &mut StepRecord) -> Result<()> {
        let s = self.gr_cfg.scale;
        let mut tape = Tape::new();
        let grv = self.gr.record(&mut tape, false);
        let gdv = self.degrader.record(&mut tape, true);
        let yv = tape.constant(y);
        let (l_ib, _) = record_loss_ib(&mut tape, &self.gr_cfg, &grv, &gdv, s, yv)?;
        rec.l_ib = Some(finite(tape.item(l_ib)?, index, "l_ib")?);
        let mut total = l_ib;
        if self.gan_active() {
            let d = self.dl.as_ref().expect("gan active");
            let dv = d.params.record(&mut tape, false);
            let xv = tape.constant(x);
            let fake = gd_forward_tape(&mut tape, &gdv, s, xv)?;
            let g = record_g_loss(&mut tape, &d.cfg, &dv, fake)?;
            rec.l_gan_g = Some(finite(tape.item(g)?, index, "l_gan_g")?);
            let weighted = tape.scalar_mul(g, self.cfg.lambda_gan);
            total = tape.add(total, weighted)?;
        }
        let grads = tape.backward(total)?;
        let Degrader::Learned(net) = &mut self.degrader else {
            unreachable!("degradation phase runs only for a learned degrader")
        };
        for (t, &v) in net.layers_mut().iter_mut().zip(&gdv) {
            t.set_grad_enabled(true);
            t.zero_grad();
            grads.accumulate_into(v, t)?;
        }
        net.center_grads();
        self.gd_opt
            .as_mut()
            .expect("trainable degrader")
            .step(net.layers_mut().iter_mut())?;
        net.project_unit_sum();
        Ok(())
    }

    /// Steps the reconstructor. Returns the (detached) degraded external
    /// patches and, with an HR discriminator, the SR of the internal patches.
    fn reconstruction_phase(
        &mut self,
        index: usize,
        y: &Tensor,
        x: &Tensor,
        rec: &mut StepRecord,
    ) -> Result<(Option<Tensor>, Option<Tensor>)> {
        let s = self.gr_cfg.scale;
        let mut tape = Tape::new();
        let grv = self.gr.record(&mut tape, true);
        let gdv = self.degrader.record(&mut tape, false);
        let mut ye_out = None;
        let mut sr_out = None;
        let total = if self.cfg.variant == Variant::Ibsr {
            let yv = tape.constant(y);
            let (l_ib, _) = record_loss_ib(&mut tape, &self.gr_cfg, &grv, &gdv, s, yv)?;
            let v = finite(tape.item(l_ib)?, index, "l_ib")?;
            if rec.l_ib.is_none() {
                rec.l_ib = Some(v);
            }
            l_ib
        } else {
            let xv = tape.constant(x);
            let (l_eb, ye, _) = record_loss_eb(&mut tape, &self.gr_cfg, &grv, &gdv, s, xv, true)?;
            rec.l_eb = Some(finite(tape.item(l_eb)?, index, "l_eb")?);
            ye_out = Some(tape.tensor(ye));
            let mut total = l_eb;
            if let Some(dh) = &self.dh {
                let yv = tape.constant(y);
                let sr = gr_forward_tape(&mut tape, &self.gr_cfg, &grv, yv)?;
                sr_out = Some(tape.tensor(sr));
                if self.cfg.lambda_gan > 0.0 {
                    let dv = dh.params.record(&mut tape, false);
                    let g = record_g_loss(&mut tape, &dh.cfg, &dv, sr)?;
                    finite(tape.item(g)?, index, "l_gan_g_hr")?;
                    let weighted = tape.scalar_mul(g, self.cfg.lambda_gan);
                    total = tape.add(total, weighted)?;
                }
            }
            total
        };
        let grads = tape.backward(total)?;
        self.gr.zero_grads();
        self.gr.accumulate_grads(&grads, &grv)?;
        self.gr_opt.step(self.gr.iter_mut().map(|(_, t)| t))?;
        Ok((ye_out, sr_out))
    }

    /// Steps a discriminator on `bce(D(real), 1) + bce(D(fake), 0)`.
    fn discriminator_phase(&mut self, index: usize, hr: bool, real: &Tensor, fake: &Tensor) -> Result<f64> {
        let d = if hr { self.dh.as_mut() } else { self.dl.as_mut() }.expect("discriminator present");
        let mut tape = Tape::new();
        let dv = d.params.record(&mut tape, true);
        let (rv, fv) = (tape.constant(real), tape.constant(fake));
        let loss = record_d_loss(&mut tape, &d.cfg, &dv, rv, fv)?;
        let value = finite(tape.item(loss)?, index, if hr { "l_gan_d_hr" } else { "l_gan_d" })?;
        let grads = tape.backward(loss)?;
        d.params.zero_grads();
        d.params.accumulate_grads(&grads, &dv)?;
        d.opt.step(d.params.iter_mut().map(|(_, t)| t))?;
        Ok(value)
    }

    /// One combined loss without detachment; every network is stepped from
    /// gradients taken at the same parameter values.
    fn joint_update(&mut self, index: usize, y: &Tensor, x: &Tensor, rec: &mut StepRecord) -> Result<()> {
        let s = self.gr_cfg.scale;
        let variant = self.cfg.variant;
        let train_gd = self.gd_opt.is_some();
        let mut tape = Tape::new();
        let grv = self.gr.record(&mut tape, true);
        let gdv = self.degrader.record(&mut tape, train_gd);
        let mut terms = Vec::new();
        let mut sr_y = None;
        if variant.internal_branch() {
            let yv = tape.constant(y);
            let (l_ib, sr) = record_loss_ib(&mut tape, &self.gr_cfg, &grv, &gdv, s, yv)?;
            rec.l_ib = Some(finite(tape.item(l_ib)?, index, "l_ib")?);
            terms.push(l_ib);
            sr_y = Some(sr);
        }
        let mut ye = None;
        if variant.external_branch() {
            let xv = tape.constant(x);
            let (l_eb, y_e, _) = record_loss_eb(&mut tape, &self.gr_cfg, &grv, &gdv, s, xv, false)?;
            rec.l_eb = Some(finite(tape.item(l_eb)?, index, "l_eb")?);
            terms.push(l_eb);
            ye = Some(y_e);
        }
        if self.gan_active() {
            if let Some(y_e) = ye {
                let d = self.dl.as_ref().expect("gan active");
                let dv = d.params.record(&mut tape, false);
                let g = record_g_loss(&mut tape, &d.cfg, &dv, y_e)?;
                rec.l_gan_g = Some(finite(tape.item(g)?, index, "l_gan_g")?);
                terms.push(tape.scalar_mul(g, self.cfg.lambda_gan));
            }
        }
        if let (Some(dh), Some(sr)) = (&self.dh, sr_y) {
            if self.cfg.lambda_gan > 0.0 {
                let dv = dh.params.record(&mut tape, false);
                let g = record_g_loss(&mut tape, &dh.cfg, &dv, sr)?;
                finite(tape.item(g)?, index, "l_gan_g_hr")?;
                terms.push(tape.scalar_mul(g, self.cfg.lambda_gan));
            }
        }
        let ye_value = ye.map(|v| tape.tensor(v));
        let sr_value = sr_y.map(|v| tape.tensor(v));
        let mut total = terms[0];
        for &t in &terms[1..] {
            total = tape.add(total, t)?;
        }
        let grads = tape.backward(total)?;

        // Discriminator gradients at the pre-update generators.
        let mut d_grads = Vec::new();
        for (hr, d) in [(false, &self.dl), (true, &self.dh)] {
            let Some(d) = d else { continue };
            let (real, fake) = match (hr, &ye_value, &sr_value) {
                (false, Some(ye), _) => (y, ye),
                (true, _, Some(sr)) => (x, sr),
                _ => continue,
            };
            let mut dt = Tape::new();
            let dv = d.params.record(&mut dt, true);
            let (rv, fv) = (dt.constant(real), dt.constant(fake));
            let loss = record_d_loss(&mut dt, &d.cfg, &dv, rv, fv)?;
            let value = finite(dt.item(loss)?, index, if hr { "l_gan_d_hr" } else { "l_gan_d" })?;
            if !hr {
                rec.l_gan_d = Some(value);
            }
            d_grads.push((hr, dt.backward(loss)?, dv));
        }

        self.gr.zero_grads();
        self.gr.accumulate_grads(&grads, &grv)?;
        self.gr_opt.step(self.gr.iter_mut().map(|(_, t)| t))?;
        if train_gd {
            if let Degrader::Learned(net) = &mut self.degrader {
                for (t, &v) in net.layers_mut().iter_mut().zip(&gdv) {
                    t.set_grad_enabled(true);
                    t.zero_grad();
                    grads.accumulate_into(v, t)?;
                }
                net.center_grads();
                self.gd_opt
                    .as_mut()
                    .expect("trainable degrader")
                    .step(net.layers_mut().iter_mut())?;
                net.project_unit_sum();
            }
        }
        for (hr, g, dv) in d_grads {
            let d = if hr { self.dh.as_mut() } else { self.dl.as_mut() }.expect("present");
            d.params.zero_grads();
            d.params.accumulate_grads(&g, &dv)?;
            d.opt.step(d.params.iter_mut().map(|(_, t)| t))?;
        }
        Ok(())
    }

    /// Runs the remaining steps and collects the outputs.
    pub fn run(mut self) -> Result<AdaptOutcome> {
        while self.step < self.cfg.steps {
            self.step()?;
        }
        self.finish()
    }

    pub fn finish(self) -> Result<AdaptOutcome> {
        let sr_final = match self.checkpoints.last() {
            Some(c) if c.step == self.step => c.image.clone(),
            _ => self.reconstruct()?,
        };
        let (psnr_final, ssim_final) = self.score(&sr_final)?;
        let mut gr = self.gr;
        gr.clear_grads();
        let mut degrader = self.degrader;
        if let Degrader::Learned(net) = &mut degrader {
            for t in net.layers_mut() {
                t.set_grad_enabled(false);
            }
        }
        Ok(AdaptOutcome {
            kernel_estimate: degrader.kernel_estimate()?,
            sr_final,
            psnr_final,
            ssim_final,
            checkpoints: self.checkpoints,
            metrics: self.log,
            gr,
            degrader,
            dl: self.dl.map(|mut d| {
                d.params.clear_grads();
                d.params
            }),
        })
    }
}

/// Everything an adaptation run produces.
#[derive(Clone, Debug)]
pub struct AdaptOutcome {
    pub sr_final: ImageBuf,
    pub psnr_final: Option<f64>,
    pub ssim_final: Option<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub kernel_estimate: Kernel2D,
    pub metrics: Vec<StepRecord>,
    pub gr: ModelParams,
    pub degrader: Degrader,
    pub dl: Option<ModelParams>,
}

impl AdaptOutcome {
    /// Checkpoint with the highest PSNR, when ground truth was supplied.
    pub fn best_checkpoint(&self) -> Option<&Checkpoint> {
        self.checkpoints
            .iter()
            .filter(|c| c.psnr.is_some())
            .max_by(|a, b| a.psnr.partial_cmp(&b.psnr).expect("finite psnr"))
    }

    /// The metrics log as JSON lines.
    pub fn metrics_jsonl(&self) -> String {
        metrics_jsonl(&self.metrics)
    }
}

pub fn metrics_jsonl(records: &[StepRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("plain record"));
        out.push('\n');
    }
    out
}

/// Blind online adaptation of `gr_init` to `lr_image` (the full algorithm
/// with the configured variant and mode).
pub fn online_adapt(
    lr_image: &ImageBuf,
    hr_pool: &[ImageBuf],
    gr_cfg: GrConfig,
    gr_init: ModelParams,
    cfg: TrainConfig,
    ground_truth: Option<&ImageBuf>,
) -> Result<AdaptOutcome> {
    let mut session = Session::new(lr_image, hr_pool, gr_cfg, gr_init, cfg)?;
    if let Some(gt) = ground_truth {
        session = session.with_ground_truth(gt)?;
    }
    session.run()
}

/// Adaptation with the degradation fixed to the ground-truth kernel: only
/// the reconstructor learns, from the external branch.
pub fn nonblind_adapt(
    lr_image: &ImageBuf,
    hr_pool: &[ImageBuf],
    gr_cfg: GrConfig,
    gr_init: ModelParams,
    gt_kernel: &Kernel2D,
    cfg: TrainConfig,
    ground_truth: Option<&ImageBuf>,
) -> Result<AdaptOutcome> {
    let cfg = TrainConfig {
        blind: false,
        gt_kernel: Some(gt_kernel.clone()),
        variant: Variant::Ebsr,
        ..cfg
    };
    online_adapt(lr_image, hr_pool, gr_cfg, gr_init, cfg, ground_truth)
}
