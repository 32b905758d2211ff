//! RRDB-lite reconstruction network.

use super::init::{fill_he, InitKind};
use super::params::{ModelParams, ParamVars, Role};
use crate::error::{ensure, Error, Result};
use crate::imaging::Rng;
use crate::numcore::{Padding, Tape, Tensor, Var, LEAKY_SLOPE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrConfig {
    pub num_blocks: usize,
    pub base_channels: usize,
    pub growth_channels: usize,
    pub dense_layers: usize,
    pub residual_scale: f64,
    pub scale: usize,
}

/// Dense blocks per residual-in-residual block.
pub const DENSE_BLOCKS_PER_RRDB: usize = 3;

impl GrConfig {
    /// Small network for CPU runs.
    pub fn lite(scale: usize) -> Self {
        Self {
            num_blocks: 3,
            base_channels: 32,
            growth_channels: 16,
            dense_layers: 4,
            residual_scale: 0.2,
            scale,
        }
    }

    /// Full-size RRDB network (23 blocks, 64 channels).
    pub fn full(scale: usize) -> Self {
        Self {
            num_blocks: 23,
            base_channels: 64,
            growth_channels: 32,
            ..Self::lite(scale)
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.scale == 2 || self.scale == 4,
            "reconstructor scale must be 2 or 4, got {}",
            self.scale
        );
        ensure!(self.num_blocks >= 1, "num_blocks must be >= 1");
        ensure!(
            self.base_channels >= 1 && self.growth_channels >= 1 && self.dense_layers >= 1,
            "channel counts and dense layers must be positive"
        );
        ensure!(
            self.residual_scale.is_finite(),
            "residual scale must be finite"
        );
        Ok(())
    }

    pub fn upsample_stages(&self) -> usize {
        if self.scale == 4 {
            2
        } else {
            1
        }
    }

    /// Parameter names and shapes in storage order.
    pub fn signature(&self) -> Vec<(String, Vec<usize>)> {
        let (nf, gc) = (self.base_channels, self.growth_channels);
        let mut sig = Vec::new();
        let conv = |sig: &mut Vec<(String, Vec<usize>)>, name: String, cout: usize, cin: usize, bias: bool| {
            sig.push((format!("{name}.weight"), vec![cout, cin, 3, 3]));
            if bias {
                sig.push((format!("{name}.bias"), vec![cout]));
            }
        };
        conv(&mut sig, "conv_first".into(), nf, 3, true);
        for b in 0..self.num_blocks {
            for r in 0..DENSE_BLOCKS_PER_RRDB {
                for l in 0..=self.dense_layers {
                    let cin = nf + l * gc;
                    let cout = if l == self.dense_layers { nf } else { gc };
                    conv(&mut sig, dense_name(b, r, l), cout, cin, true);
                }
            }
        }
        conv(&mut sig, "trunk".into(), nf, nf, true);
        for u in 0..self.upsample_stages() {
            conv(&mut sig, format!("up{u}"), nf, nf, true);
        }
        conv(&mut sig, "conv_last".into(), 3, nf, false);
        sig
    }

    /// Architecture recovered from stored parameter shapes.
    ///
    /// The residual scale is not stored and takes its default value.
    pub fn infer(params: &ModelParams) -> Result<Self> {
        ensure!(
            params.role() == Role::Gr,
            "expected reconstructor parameters, found the {} role",
            params.role().label()
        );
        let shape = |name: &str| -> Result<Vec<usize>> {
            params
                .get(name)
                .map(|t| t.shape().to_vec())
                .ok_or_else(|| Error::ParamMismatch {
                    name: name.into(),
                    detail: "missing".into(),
                })
        };
        let base_channels = shape("conv_first.weight")?[0];
        let growth_channels = shape(&format!("{}.weight", dense_name(0, 0, 0)))?[0];
        let num_blocks = (0..)
            .take_while(|&b| params.get(&format!("{}.weight", dense_name(b, 0, 0))).is_some())
            .count();
        let dense_layers = (0..)
            .take_while(|&l| params.get(&format!("{}.weight", dense_name(0, 0, l))).is_some())
            .count()
            .saturating_sub(1);
        let ups = (0..)
            .take_while(|&u| params.get(&format!("up{u}.weight")).is_some())
            .count();
        let scale = match ups {
            1 => 2,
            2 => 4,
            n => {
                return Err(Error::ParamMismatch {
                    name: "up0.weight".into(),
                    detail: format!("{n} upsampling stages match no supported scale"),
                })
            }
        };
        let cfg = Self {
            num_blocks,
            base_channels,
            growth_channels,
            dense_layers,
            residual_scale: 0.2,
            scale,
        };
        check_params(&cfg, params)?;
        Ok(cfg)
    }
}

fn dense_name(block: usize, rdb: usize, layer: usize) -> String {
    format!("rrdb{block}.rdb{rdb}.conv{layer}")
}

/// Verifies that `params` has exactly the tensors of `cfg`, in order.
pub fn check_params(cfg: &GrConfig, params: &ModelParams) -> Result<()> {
    cfg.validate()?;
    ensure!(
        params.role() == Role::Gr,
        "expected reconstructor parameters, found the {} role",
        params.role().label()
    );
    let sig = cfg.signature();
    let mut stored = params.iter();
    for (name, shape) in &sig {
        match stored.next() {
            Some((n, t)) if n == name && t.shape() == shape.as_slice() => {}
            Some((n, t)) if n == name => {
                return Err(Error::ParamMismatch {
                    name: name.clone(),
                    detail: format!("shape {:?}, configuration expects {:?}", t.shape(), shape),
                })
            }
            Some((n, _)) => {
                return Err(Error::ParamMismatch {
                    name: name.clone(),
                    detail: format!("found `{n}` in its place"),
                })
            }
            None => {
                return Err(Error::ParamMismatch {
                    name: name.clone(),
                    detail: "missing".into(),
                })
            }
        }
    }
    if let Some((n, _)) = stored.next() {
        return Err(Error::ParamMismatch {
            name: n.to_string(),
            detail: "not part of the configured architecture".into(),
        });
    }
    Ok(())
}

/// Fan-in scaled random init; dense-block convs are scaled down by 0.1,
/// biases start at zero and the last conv at zero.
pub fn gr_init(cfg: &GrConfig, rng: &Rng) -> Result<ModelParams> {
    cfg.validate()?;
    let mut p = ModelParams::new(Role::Gr);
    for (name, shape) in cfg.signature() {
        let kind = if name.ends_with(".bias") || name.starts_with("conv_last") {
            InitKind::Zero
        } else if name.starts_with("rrdb") {
            InitKind::He { gain: 0.1 }
        } else {
            InitKind::He { gain: 1.0 }
        };
        let t = fill_he(&shape, kind, &mut rng.keyed(crate::imaging::Stream::Init, &format!("gr/{name}")));
        p.insert(name, t)?;
    }
    Ok(p)
}

fn conv(tape: &mut Tape, v: &ParamVars, name: &str, x: Var, bias: bool) -> Result<Var> {
    let w = v[format!("{name}.weight").as_str()];
    let b = if bias {
        Some(v[format!("{name}.bias").as_str()])
    } else {
        None
    };
    tape.conv2d(x, w, b, Padding::Zero, 1)
}

fn dense_block(tape: &mut Tape, cfg: &GrConfig, v: &ParamVars, b: usize, r: usize, x: Var) -> Result<Var> {
    let mut feats = vec![x];
    for l in 0..cfg.dense_layers {
        let input = if feats.len() == 1 {
            x
        } else {
            tape.concat_channels(&feats)?
        };
        let y = conv(tape, v, &dense_name(b, r, l), input, true)?;
        feats.push(tape.leaky_relu(y, LEAKY_SLOPE));
    }
    let input = tape.concat_channels(&feats)?;
    let fused = conv(tape, v, &dense_name(b, r, cfg.dense_layers), input, true)?;
    let scaled = tape.scalar_mul(fused, cfg.residual_scale);
    tape.add(x, scaled)
}

fn rrdb(tape: &mut Tape, cfg: &GrConfig, v: &ParamVars, b: usize, x: Var) -> Result<Var> {
    let mut h = x;
    for r in 0..DENSE_BLOCKS_PER_RRDB {
        h = dense_block(tape, cfg, v, b, r, h)?;
    }
    let scaled = tape.scalar_mul(h, cfg.residual_scale);
    tape.add(x, scaled)
}

/// Forward pass on a tape for `[3, h, w]` or `[B, 3, h, w]` input.
pub fn gr_forward_tape(tape: &mut Tape, cfg: &GrConfig, v: &ParamVars, x: Var) -> Result<Var> {
    let shape = tape.shape(x).to_vec();
    let c_axis = shape.len().wrapping_sub(3);
    ensure!(
        (shape.len() == 3 || shape.len() == 4) && shape[c_axis] == 3,
        "reconstructor input must be [3, h, w] or [B, 3, h, w], got {shape:?}"
    );
    let shallow = conv(tape, v, "conv_first", x, true)?;
    let mut h = shallow;
    for b in 0..cfg.num_blocks {
        h = rrdb(tape, cfg, v, b, h)?;
    }
    let trunk = conv(tape, v, "trunk", h, true)?;
    let mut h = tape.add(shallow, trunk)?;
    for u in 0..cfg.upsample_stages() {
        let up = tape.upsample_nearest(h, 2)?;
        let y = conv(tape, v, &format!("up{u}"), up, true)?;
        h = tape.leaky_relu(y, LEAKY_SLOPE);
    }
    conv(tape, v, "conv_last", h, false)
}

/// Gradient-free forward pass.
pub fn gr_forward(cfg: &GrConfig, params: &ModelParams, y: &Tensor) -> Result<Tensor> {
    check_params(cfg, params)?;
    let mut tape = Tape::new();
    let vars = params.record(&mut tape, false);
    let x = tape.constant(y);
    let out = gr_forward_tape(&mut tape, cfg, &vars, x)?;
    Ok(tape.tensor(out))
}
