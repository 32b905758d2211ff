//! Internal-branch, external-branch and adversarial losses.
//!
//! The `record_*` builders put a loss on an existing tape so callers decide
//! which parameters are variables; the plain functions evaluate values only.

use crate::degradation::{gd_forward_tape, GdNet};
use crate::error::{ensure, Result};
use crate::models::{dl_forward_tape, gr_forward_tape, DlConfig, GrConfig, ModelParams, ParamVars};
use crate::numcore::{Tape, Tensor, Var};

fn check_batch(tape: &Tape, v: Var, what: &str) -> Result<()> {
    let s = tape.shape(v);
    ensure!(
        s.len() == 4 && s[0] >= 1,
        "{what} must be a non-empty [n, 3, h, w] batch, got {s:?}"
    );
    Ok(())
}

/// `mean |y - G_d(G_r(y))|`. Returns `(loss, G_r(y))`.
pub fn record_loss_ib(
    tape: &mut Tape,
    gr_cfg: &GrConfig,
    gr: &ParamVars,
    gd: &[Var],
    scale: usize,
    y: Var,
) -> Result<(Var, Var)> {
    check_batch(tape, y, "internal-branch input")?;
    let sr = gr_forward_tape(tape, gr_cfg, gr, y)?;
    let back = gd_forward_tape(tape, gd, scale, sr)?;
    Ok((tape.l1_loss(back, y)?, sr))
}

/// `mean |x - G_r(y_e)|` with `y_e = G_d(x)`. When `detach` is set `y_e` is
/// cut from the tape, so the degradation receives no gradient. Returns
/// `(loss, y_e, G_r(y_e))`.
pub fn record_loss_eb(
    tape: &mut Tape,
    gr_cfg: &GrConfig,
    gr: &ParamVars,
    gd: &[Var],
    scale: usize,
    x: Var,
    detach: bool,
) -> Result<(Var, Var, Var)> {
    check_batch(tape, x, "external-branch input")?;
    let mut ye = gd_forward_tape(tape, gd, scale, x)?;
    if detach {
        ye = tape.detach(ye);
    }
    let sr = gr_forward_tape(tape, gr_cfg, gr, ye)?;
    Ok((tape.l1_loss(sr, x)?, ye, sr))
}

/// Generator side: `bce(D(fake), 1)`. Record `d` as constants to keep the
/// discriminator out of the update.
pub fn record_g_loss(tape: &mut Tape, cfg: &DlConfig, d: &ParamVars, fake: Var) -> Result<Var> {
    check_batch(tape, fake, "fake patches")?;
    let logits = dl_forward_tape(tape, cfg, d, fake)?;
    tape.bce_with_logits(logits, 1.0)
}

/// Discriminator side: `bce(D(real), 1) + bce(D(fake), 0)`.
pub fn record_d_loss(tape: &mut Tape, cfg: &DlConfig, d: &ParamVars, real: Var, fake: Var) -> Result<Var> {
    check_batch(tape, real, "real patches")?;
    check_batch(tape, fake, "fake patches")?;
    let lr = dl_forward_tape(tape, cfg, d, real)?;
    let lf = dl_forward_tape(tape, cfg, d, fake)?;
    let a = tape.bce_with_logits(lr, 1.0)?;
    let b = tape.bce_with_logits(lf, 0.0)?;
    tape.add(a, b)
}

/// Value of the internal-branch loss on `[n, 3, p, p]` LR patches.
pub fn loss_ib(y: &Tensor, gr_cfg: &GrConfig, gr: &ModelParams, gd: &GdNet) -> Result<f32> {
    let mut tape = Tape::new();
    let grv = gr.record(&mut tape, false);
    let gdv = gd.record(&mut tape, false);
    let yv = tape.constant(y);
    let (l, _) = record_loss_ib(&mut tape, gr_cfg, &grv, &gdv, gd.scale(), yv)?;
    tape.item(l)
}

/// Value of the external-branch loss on `[n, 3, s·p, s·p]` HR patches.
pub fn loss_eb(x: &Tensor, gr_cfg: &GrConfig, gr: &ModelParams, gd: &GdNet) -> Result<f32> {
    let mut tape = Tape::new();
    let grv = gr.record(&mut tape, false);
    let gdv = gd.record(&mut tape, false);
    let xv = tape.constant(x);
    let (l, _, _) = record_loss_eb(&mut tape, gr_cfg, &grv, &gdv, gd.scale(), xv, true)?;
    tape.item(l)
}

/// `(d_loss, g_loss)` for real LR patches `y` and fakes `G_d(x)`.
pub fn gan_losses(
    y: &Tensor,
    x: &Tensor,
    gd: &GdNet,
    dl_cfg: &DlConfig,
    dl: &ModelParams,
) -> Result<(f32, f32)> {
    let mut tape = Tape::new();
    let dv = dl.record(&mut tape, false);
    let gdv = gd.record(&mut tape, false);
    let (yv, xv) = (tape.constant(y), tape.constant(x));
    let fake = gd_forward_tape(&mut tape, &gdv, gd.scale(), xv)?;
    let g = record_g_loss(&mut tape, dl_cfg, &dv, fake)?;
    let fake_d = tape.detach(fake);
    let d = record_d_loss(&mut tape, dl_cfg, &dv, yv, fake_d)?;
    Ok((tape.item(d)?, tape.item(g)?))
}
