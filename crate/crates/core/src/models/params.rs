//! Named parameter tensors and their binary file format.
//!
//! Layout (little-endian): magic `ONSR`, `u16` version, `u8` role, `u32`
//! tensor count, then per tensor `u16` name length, UTF-8 name, `u8` dtype
//! (0 = f32), `u8` rank, `u32` dims and the raw payload.

use std::path::Path;

use indexmap::IndexMap;

use crate::error::{ensure, Error, Result};
use crate::numcore::{Gradients, Tape, Tensor, Var};

pub const MAGIC: &[u8; 4] = b"ONSR";
pub const FORMAT_VERSION: u16 = 1;
const DTYPE_F32: u8 = 0;

/// Which network a parameter set belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Gr = 0,
    Gd = 1,
    Dl = 2,
}

impl Role {
    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Role::Gr),
            1 => Some(Role::Gd),
            2 => Some(Role::Dl),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::Gr => "reconstructor",
            Role::Gd => "degradation",
            Role::Dl => "discriminator",
        }
    }
}

/// Ordered name → tensor map tagged with its role.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    role: Role,
    tensors: IndexMap<String, Tensor>,
}

/// Tape handles of a recorded parameter set, in parameter order.
pub type ParamVars = IndexMap<String, Var>;

impl ModelParams {
    pub fn new(role: Role) -> Self {
        Self {
            role,
            tensors: IndexMap::new(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if self.tensors.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        self.tensors.insert(name, tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.tensors.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.tensors.values().map(Tensor::numel).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.values().all(Tensor::all_finite)
    }

    pub fn zero_grads(&mut self) {
        for t in self.tensors.values_mut() {
            t.zero_grad();
        }
    }

    /// Drops every gradient buffer.
    pub fn clear_grads(&mut self) {
        for t in self.tensors.values_mut() {
            t.set_grad_enabled(false);
        }
    }

    /// Records every tensor on `tape`, as variables when `trainable`.
    pub fn record(&self, tape: &mut Tape, trainable: bool) -> ParamVars {
        self.tensors
            .iter()
            .map(|(name, t)| {
                let v = if trainable {
                    tape.variable(t)
                } else {
                    tape.constant(t)
                };
                (name.clone(), v)
            })
            .collect()
    }

    /// Adds the tape gradients of `vars` into the parameters' gradient
    /// buffers (enabling them on first use).
    pub fn accumulate_grads(&mut self, grads: &Gradients<f32>, vars: &ParamVars) -> Result<()> {
        for (name, &var) in vars {
            let t = self.tensors.get_mut(name).ok_or_else(|| Error::ParamMismatch {
                name: name.clone(),
                detail: "recorded variable has no parameter".into(),
            })?;
            if !t.grad_enabled() {
                t.set_grad_enabled(true);
            }
            grads.accumulate_into(var, t)?;
        }
        Ok(())
    }

    /// Byte-level fingerprint of the parameter values (gradients excluded).
    pub fn value_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for t in self.tensors.values() {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.role as u8);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            let nb = name.as_bytes();
            ensure!(nb.len() <= u16::MAX as usize, "tensor name too long: {name}");
            ensure!(t.rank() <= u8::MAX as usize, "tensor `{name}` has too many axes");
            out.extend_from_slice(&(nb.len() as u16).to_le_bytes());
            out.extend_from_slice(nb);
            out.push(DTYPE_F32);
            out.push(t.rank() as u8);
            for &d in t.shape() {
                ensure!(d <= u32::MAX as usize, "tensor `{name}` axis too long");
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::NotAModel);
        }
        r.pos = 4;
        let version = u16::from_le_bytes(r.take::<2>("version")?);
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let [tag] = r.take::<1>("role tag")?;
        let role = Role::from_tag(tag).ok_or_else(|| Error::Parse {
            what: "model file",
            detail: format!("unknown role tag {tag}"),
        })?;
        let count = u32::from_le_bytes(r.take::<4>("tensor count")?);
        let mut params = ModelParams::new(role);
        for i in 0..count {
            let len = u16::from_le_bytes(r.take::<2>("name length")?) as usize;
            let name = std::str::from_utf8(r.slice(len, "tensor name")?)
                .map_err(|_| Error::Parse {
                    what: "model file",
                    detail: format!("name of tensor {i} is not UTF-8"),
                })?
                .to_string();
            let [dtype] = r.take::<1>("dtype")?;
            if dtype != DTYPE_F32 {
                return Err(Error::Parse {
                    what: "model file",
                    detail: format!("tensor `{name}` has unknown dtype {dtype}"),
                });
            }
            let [rank] = r.take::<1>("rank")?;
            let mut shape = Vec::with_capacity(rank as usize);
            for _ in 0..rank {
                shape.push(u32::from_le_bytes(r.take::<4>("dimension")?) as usize);
            }
            let numel = shape
                .iter()
                .try_fold(1usize, |a, &d| a.checked_mul(d))
                .ok_or_else(|| Error::Truncated(format!("tensor `{name}` is impossibly large")))?;
            let payload = r.slice(
                numel
                    .checked_mul(4)
                    .ok_or_else(|| Error::Truncated(format!("tensor `{name}` is impossibly large")))?,
                "tensor payload",
            )?;
            let data = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            params.insert(name, Tensor::from_vec(shape, data)?)?;
        }
        ensure_trailing(&r)?;
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn ensure_trailing(r: &Reader) -> Result<()> {
    if r.pos != r.bytes.len() {
        return Err(Error::Parse {
            what: "model file",
            detail: format!("{} unexpected trailing bytes", r.bytes.len() - r.pos),
        });
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn slice(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated(format!("{what} at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.slice(N, what)?.try_into().expect("slice length"))
    }
}

pub fn save_params(params: &ModelParams, path: &Path) -> Result<()> {
    params.save(path)
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    ModelParams::load(path)
}
