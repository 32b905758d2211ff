//! VGG-style patch discriminator.

use super::init::{fill_he, InitKind};
use super::params::{ModelParams, ParamVars, Role};
use crate::error::{ensure, Result};
use crate::imaging::{Rng, Stream};
use crate::numcore::{Padding, Tape, Tensor, Var, LEAKY_SLOPE};

#[derive(Clone, Debug, PartialEq)]
pub struct DlConfig {
    pub input_size: usize,
    /// Output channels of the stride-2 conv stages.
    pub ladder: Vec<usize>,
}

impl Default for DlConfig {
    fn default() -> Self {
        Self {
            input_size: 32,
            ladder: vec![32, 64, 128, 256],
        }
    }
}

impl DlConfig {
    /// Discriminator for `size×size` patches: the default ladder, extended
    /// with 256-channel stages until the map is 2×2.
    pub fn for_input(size: usize) -> Self {
        let mut cfg = Self {
            input_size: size,
            ..Self::default()
        };
        while cfg.final_extent() > 2 {
            cfg.ladder.push(256);
        }
        cfg
    }

    /// Spatial extent after the conv stages.
    pub fn final_extent(&self) -> usize {
        self.ladder
            .iter()
            .fold(self.input_size, |s, _| (s + 2 - 3) / 2 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.input_size >= 2, "discriminator input too small");
        ensure!(!self.ladder.is_empty(), "discriminator needs at least one stage");
        Ok(())
    }

    pub fn signature(&self) -> Vec<(String, Vec<usize>)> {
        let mut sig = Vec::new();
        let mut cin = 3;
        for (i, &c) in self.ladder.iter().enumerate() {
            sig.push((format!("conv{i}.weight"), vec![c, cin, 3, 3]));
            sig.push((format!("conv{i}.bias"), vec![c]));
            cin = c;
        }
        let e = self.final_extent();
        sig.push(("fc.weight".into(), vec![1, cin * e * e]));
        sig.push(("fc.bias".into(), vec![1]));
        sig
    }
}

/// Fan-in scaled init keyed by `tag` (so two discriminators in one session
/// draw from different streams).
pub fn dl_init(cfg: &DlConfig, rng: &Rng, tag: &str) -> Result<ModelParams> {
    cfg.validate()?;
    let mut p = ModelParams::new(Role::Dl);
    for (name, shape) in cfg.signature() {
        let kind = if name.ends_with(".bias") {
            InitKind::Zero
        } else {
            InitKind::He { gain: 1.0 }
        };
        let t = fill_he(&shape, kind, &mut rng.keyed(Stream::Init, &format!("{tag}/{name}")));
        p.insert(name, t)?;
    }
    Ok(p)
}

/// Logits `[B]` for `[B, 3, S, S]` input (`[1]` for `[3, S, S]`).
pub fn dl_forward_tape(tape: &mut Tape, cfg: &DlConfig, v: &ParamVars, x: Var) -> Result<Var> {
    let shape = tape.shape(x).to_vec();
    let s = cfg.input_size;
    let x = match shape.as_slice() {
        [3, h, w] if *h == s && *w == s => tape.reshape(x, vec![1, 3, s, s])?,
        [_, 3, h, w] if *h == s && *w == s => x,
        _ => {
            return Err(crate::error::contract!(
                "discriminator expects [B, 3, {s}, {s}] patches, got {shape:?}"
            ))
        }
    };
    let batch = tape.shape(x)[0];
    let mut h = x;
    for i in 0..cfg.ladder.len() {
        let w = v[format!("conv{i}.weight").as_str()];
        let b = v[format!("conv{i}.bias").as_str()];
        let y = tape.conv2d(h, w, Some(b), Padding::Zero, 2)?;
        h = tape.leaky_relu(y, LEAKY_SLOPE);
    }
    let feat = tape.shape(h)[1..].iter().product::<usize>();
    let flat = tape.reshape(h, vec![batch, feat])?;
    let logits = tape.linear(flat, v["fc.weight"], Some(v["fc.bias"]))?;
    tape.reshape(logits, vec![batch])
}

/// Gradient-free logits.
pub fn dl_forward(cfg: &DlConfig, params: &ModelParams, patches: &Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let vars = params.record(&mut tape, false);
    let x = tape.constant(patches);
    let out = dl_forward_tape(&mut tape, cfg, &vars, x)?;
    Ok(tape.tensor(out))
}
