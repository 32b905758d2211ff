//! Reverse-mode differentiation over an append-only operation record.

use super::conv::{self, ConvGeometry, Padding};
use super::resample::{planes_of, Direction, ResamplePlan};
use super::{Scalar, Tensor};
use crate::error::{contract, ensure, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op<T: Scalar> {
    Leaf,
    Conv2d {
        input: Var,
        weight: Var,
        bias: Option<Var>,
        geom: Box<ConvGeometry>,
    },
    Resample {
        input: Var,
        plan: ResamplePlan,
        planes: usize,
    },
    LeakyRelu {
        input: Var,
        slope: T,
    },
    Add {
        a: Var,
        b: Var,
    },
    Sub {
        a: Var,
        b: Var,
    },
    Scale {
        input: Var,
        factor: T,
    },
    Mean {
        input: Var,
    },
    L1 {
        a: Var,
        b: Var,
    },
    BceLogits {
        logits: Var,
        target: T,
    },
    Reshape {
        input: Var,
    },
    Concat {
        inputs: Vec<Var>,
        outer: usize,
        inner: usize,
    },
    UpsampleNearest {
        input: Var,
        factor: usize,
    },
    Linear {
        input: Var,
        weight: Var,
        bias: Option<Var>,
    },
}

struct Node<T: Scalar> {
    shape: Vec<usize>,
    data: Vec<T>,
    requires_grad: bool,
    op: Op<T>,
}

/// Ordered record of executed operations.
///
/// Leaves are copies of caller tensors; a leaf made from a tensor with
/// gradients enabled is differentiable, anything else is a constant. An
/// operation is differentiable when any of its inputs is, and `backward`
/// only visits differentiable nodes.
pub struct Tape<T: Scalar = f32> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradients of one backward pass, indexed by [`Var`].
pub struct Gradients<T: Scalar> {
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn get(&self, var: Var) -> Option<&[T]> {
        self.grads.get(var.0).and_then(|g| g.as_deref())
    }

    /// Adds the gradient of `var` into `tensor`'s gradient buffer.
    pub fn accumulate_into(&self, var: Var, tensor: &mut Tensor<T>) -> Result<()> {
        match self.get(var) {
            Some(g) => tensor.accumulate_grad(g),
            None => Ok(()),
        }
    }
}

fn same_len(a: &[usize], b: &[usize]) -> bool {
    a == b
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every record; outstanding `Var`s become invalid.
    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    fn push(&mut self, shape: Vec<usize>, data: Vec<T>, requires_grad: bool, op: Op<T>) -> Var {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.nodes.push(Node {
            shape,
            data,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn node(&self, v: Var) -> &Node<T> {
        &self.nodes[v.0]
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Records a copy of `tensor`; differentiable iff its gradients are enabled.
    pub fn leaf(&mut self, tensor: &Tensor<T>) -> Var {
        self.push(
            tensor.shape().to_vec(),
            tensor.data().to_vec(),
            tensor.grad_enabled(),
            Op::Leaf,
        )
    }

    /// Records a copy of `tensor` that never receives gradients.
    pub fn constant(&mut self, tensor: &Tensor<T>) -> Var {
        self.push(tensor.shape().to_vec(), tensor.data().to_vec(), false, Op::Leaf)
    }

    /// Records a copy of `tensor` that always receives gradients.
    pub fn variable(&mut self, tensor: &Tensor<T>) -> Var {
        self.push(tensor.shape().to_vec(), tensor.data().to_vec(), true, Op::Leaf)
    }

    /// Same value as `v`, cut off from the gradient flow.
    pub fn detach(&mut self, v: Var) -> Var {
        let n = self.node(v);
        let (shape, data) = (n.shape.clone(), n.data.clone());
        self.push(shape, data, false, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &[T] {
        &self.node(v).data
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.node(v).shape
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.rg(v)
    }

    pub fn tensor(&self, v: Var) -> Tensor<T> {
        let n = self.node(v);
        Tensor::from_vec(n.shape.clone(), n.data.clone()).expect("node shape invariant")
    }

    pub fn item(&self, v: Var) -> Result<T> {
        let n = self.node(v);
        ensure!(n.data.len() == 1, "item() on value of shape {:?}", n.shape);
        Ok(n.data[0])
    }

    // ---- operations -------------------------------------------------------

    pub fn conv2d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Option<Var>,
        padding: Padding,
        stride: usize,
    ) -> Result<Var> {
        let geom = ConvGeometry::new(self.shape(input), self.shape(weight), padding, stride)?;
        if let Some(b) = bias {
            ensure!(
                self.node(b).data.len() == geom.cout,
                "conv2d bias has {} entries for {} output channels",
                self.node(b).data.len(),
                geom.cout
            );
        }
        let out = conv::forward(
            &geom,
            self.value(input),
            self.value(weight),
            bias.map(|b| self.value(b)),
        );
        let rg = self.rg(input) || self.rg(weight) || bias.is_some_and(|b| self.rg(b));
        Ok(self.push(
            geom.out_shape(),
            out,
            rg,
            Op::Conv2d {
                input,
                weight,
                bias,
                geom: Box::new(geom),
            },
        ))
    }

    /// Bicubic resampling of the last two axes.
    pub fn bicubic_resample(&mut self, input: Var, factor: usize, direction: Direction) -> Result<Var> {
        let shape = self.shape(input).to_vec();
        let planes = planes_of(&shape)?;
        let r = shape.len();
        let plan = ResamplePlan::new(shape[r - 2], shape[r - 1], factor, direction)?;
        let out = plan.forward(self.value(input), planes);
        let rg = self.rg(input);
        Ok(self.push(plan.out_shape(&shape), out, rg, Op::Resample { input, plan, planes }))
    }

    pub fn leaky_relu(&mut self, input: Var, slope: f64) -> Var {
        let slope = T::of_f64(slope);
        let n = self.node(input);
        let data = n
            .data
            .iter()
            .map(|&x| if x > T::zero() { x } else { slope * x })
            .collect();
        let shape = n.shape.clone();
        let rg = n.requires_grad;
        self.push(shape, data, rg, Op::LeakyRelu { input, slope })
    }

    fn binary_shape(&self, a: Var, b: Var, what: &str) -> Result<Vec<usize>> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let (na, nb) = (self.value(a).len(), self.value(b).len());
        if same_len(sa, sb) || nb == 1 {
            Ok(sa.to_vec())
        } else if na == 1 {
            Ok(sb.to_vec())
        } else {
            Err(contract!("{what}: shapes {:?} and {:?} differ", sa, sb))
        }
    }

    fn zip_broadcast(&self, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Vec<T> {
        let (da, db) = (self.value(a), self.value(b));
        let n = da.len().max(db.len());
        (0..n)
            .map(|i| {
                let x = if da.len() == 1 { da[0] } else { da[i] };
                let y = if db.len() == 1 { db[0] } else { db[i] };
                f(x, y)
            })
            .collect()
    }

    /// Elementwise sum; either operand may be a one-element tensor.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let shape = self.binary_shape(a, b, "add")?;
        let data = self.zip_broadcast(a, b, |x, y| x + y);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(shape, data, rg, Op::Add { a, b }))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let shape = self.binary_shape(a, b, "sub")?;
        let data = self.zip_broadcast(a, b, |x, y| x - y);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(shape, data, rg, Op::Sub { a, b }))
    }

    pub fn scalar_mul(&mut self, input: Var, factor: f64) -> Var {
        let factor = T::of_f64(factor);
        let n = self.node(input);
        let data = n.data.iter().map(|&x| x * factor).collect();
        let shape = n.shape.clone();
        let rg = n.requires_grad;
        self.push(shape, data, rg, Op::Scale { input, factor })
    }

    /// Mean over all elements, as a scalar.
    pub fn mean(&mut self, input: Var) -> Var {
        let n = self.node(input);
        let len = T::of_f64(n.data.len() as f64);
        let s: T = n.data.iter().copied().sum();
        let rg = n.requires_grad;
        self.push(vec![], vec![s / len], rg, Op::Mean { input })
    }

    /// `mean(|a - b|)`.
    pub fn l1_loss(&mut self, a: Var, b: Var) -> Result<Var> {
        ensure!(
            self.shape(a) == self.shape(b),
            "l1_loss: shapes {:?} and {:?} differ",
            self.shape(a),
            self.shape(b)
        );
        let (da, db) = (self.value(a), self.value(b));
        let s: T = da.iter().zip(db).map(|(&x, &y)| (x - y).abs()).sum();
        let v = s / T::of_f64(da.len() as f64);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(vec![], vec![v], rg, Op::L1 { a, b }))
    }

    /// Mean binary cross-entropy of `sigmoid(logits)` against a constant
    /// target in `{0, 1}`, in the overflow-free form
    /// `max(z, 0) - z·t + ln(1 + e^{-|z|})`.
    pub fn bce_with_logits(&mut self, logits: Var, target: f64) -> Result<Var> {
        ensure!(
            target == 0.0 || target == 1.0,
            "bce_with_logits target must be 0 or 1, got {target}"
        );
        let t = T::of_f64(target);
        let d = self.value(logits);
        let s: T = d
            .iter()
            .map(|&z| z.max(T::zero()) - z * t + (-z.abs()).exp().ln_1p())
            .sum();
        let v = s / T::of_f64(d.len() as f64);
        let rg = self.rg(logits);
        Ok(self.push(vec![], vec![v], rg, Op::BceLogits { logits, target: t }))
    }

    pub fn reshape(&mut self, input: Var, shape: impl Into<Vec<usize>>) -> Result<Var> {
        let shape = shape.into();
        let n = self.node(input);
        ensure!(
            shape.iter().product::<usize>() == n.data.len(),
            "cannot reshape {:?} into {:?}",
            n.shape,
            shape
        );
        let data = n.data.clone();
        let rg = n.requires_grad;
        Ok(self.push(shape, data, rg, Op::Reshape { input }))
    }

    /// Concatenation along the channel axis (axis 0 of `[C,H,W]`, axis 1 of
    /// `[B,C,H,W]`).
    pub fn concat_channels(&mut self, inputs: &[Var]) -> Result<Var> {
        ensure!(!inputs.is_empty(), "concat of zero tensors");
        let first = self.shape(inputs[0]).to_vec();
        let axis = match first.len() {
            3 => 0,
            4 => 1,
            r => return Err(contract!("concat_channels on rank-{r} tensor")),
        };
        let outer: usize = first[..axis].iter().product();
        let inner: usize = first[axis + 1..].iter().product();
        let mut channels = 0;
        for &v in inputs {
            let s = self.shape(v);
            ensure!(
                s.len() == first.len()
                    && s[..axis] == first[..axis]
                    && s[axis + 1..] == first[axis + 1..],
                "concat of incompatible shapes {:?} and {:?}",
                first,
                s
            );
            channels += s[axis];
        }
        let mut data = Vec::with_capacity(outer * channels * inner);
        for o in 0..outer {
            for &v in inputs {
                let c = self.shape(v)[axis];
                data.extend_from_slice(&self.value(v)[o * c * inner..(o + 1) * c * inner]);
            }
        }
        let mut shape = first;
        shape[axis] = channels;
        let rg = inputs.iter().any(|&v| self.rg(v));
        Ok(self.push(
            shape,
            data,
            rg,
            Op::Concat {
                inputs: inputs.to_vec(),
                outer,
                inner,
            },
        ))
    }

    /// Nearest-neighbour upsampling of the last two axes.
    pub fn upsample_nearest(&mut self, input: Var, factor: usize) -> Result<Var> {
        ensure!(factor >= 1, "upsample factor must be >= 1");
        let shape = self.shape(input).to_vec();
        let planes = planes_of(&shape)?;
        let r = shape.len();
        let (h, w) = (shape[r - 2], shape[r - 1]);
        let (ho, wo) = (h * factor, w * factor);
        let src = self.value(input);
        let mut data = Vec::with_capacity(planes * ho * wo);
        for p in 0..planes {
            for y in 0..ho {
                let row = &src[(p * h + y / factor) * w..(p * h + y / factor + 1) * w];
                for x in 0..wo {
                    data.push(row[x / factor]);
                }
            }
        }
        let mut out_shape = shape;
        out_shape[r - 2] = ho;
        out_shape[r - 1] = wo;
        let rg = self.rg(input);
        Ok(self.push(out_shape, data, rg, Op::UpsampleNearest { input, factor }))
    }

    /// `[B, F] · [O, F]ᵀ + b → [B, O]`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Option<Var>) -> Result<Var> {
        let (si, sw) = (self.shape(input).to_vec(), self.shape(weight).to_vec());
        ensure!(
            si.len() == 2 && sw.len() == 2 && si[1] == sw[1],
            "linear: input {:?} incompatible with weight {:?}",
            si,
            sw
        );
        let (b, f, o) = (si[0], si[1], sw[0]);
        if let Some(bv) = bias {
            ensure!(
                self.value(bv).len() == o,
                "linear bias has {} entries for {} outputs",
                self.value(bv).len(),
                o
            );
        }
        let mut out = vec![T::zero(); b * o];
        super::scalar::matmul(b, f, o, self.value(input), false, self.value(weight), true, &mut out, false);
        if let Some(bv) = bias {
            let bd = self.value(bv);
            for row in out.chunks_mut(o) {
                for (v, &bb) in row.iter_mut().zip(bd) {
                    *v = *v + bb;
                }
            }
        }
        let rg = self.rg(input) || self.rg(weight) || bias.is_some_and(|v| self.rg(v));
        Ok(self.push(vec![b, o], out, rg, Op::Linear { input, weight, bias }))
    }

    // ---- backward ---------------------------------------------------------

    /// Consumes the tape and returns d`loss`/d`v` for every differentiable
    /// leaf `v`.
    pub fn backward(self, loss: Var) -> Result<Gradients<T>> {
        ensure!(!self.nodes.is_empty(), "backward on an empty tape");
        ensure!(loss.0 < self.nodes.len(), "loss is not recorded on this tape");
        let ln = &self.nodes[loss.0];
        ensure!(
            ln.data.len() == 1,
            "backward needs a scalar loss, got shape {:?}",
            ln.shape
        );
        ensure!(
            ln.requires_grad,
            "loss does not depend on any differentiable value"
        );
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            self.propagate(node, &g, &mut grads);
        }
        // Only leaves keep their gradients.
        for (node, g) in self.nodes.iter().zip(grads.iter_mut()) {
            if !matches!(node.op, Op::Leaf) {
                *g = None;
            }
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node<T>, g: &[T], grads: &mut [Option<Vec<T>>]) {
        let rg = |v: Var| self.nodes[v.0].requires_grad;
        let mut add = |v: Var, delta: Vec<T>| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            match grads[v.0].as_mut() {
                Some(acc) => acc.iter_mut().zip(&delta).for_each(|(a, d)| *a = *a + *d),
                None => grads[v.0] = Some(delta),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::Conv2d {
                input,
                weight,
                bias,
                geom,
            } => {
                let out = conv::backward(
                    geom,
                    self.value(*input),
                    self.value(*weight),
                    g,
                    (rg(*input), rg(*weight), bias.is_some_and(rg)),
                );
                if let Some(gi) = out.input {
                    add(*input, gi);
                }
                if let Some(gw) = out.weight {
                    add(*weight, gw);
                }
                if let (Some(b), Some(gb)) = (bias, out.bias) {
                    add(*b, gb);
                }
            }
            Op::Resample {
                input,
                plan,
                planes,
            } => add(*input, plan.backward(g, *planes)),
            Op::LeakyRelu { input, slope } => {
                let x = self.value(*input);
                let d = x
                    .iter()
                    .zip(g)
                    .map(|(&x, &g)| if x > T::zero() { g } else { *slope * g })
                    .collect();
                add(*input, d);
            }
            Op::Add { a, b } | Op::Sub { a, b } => {
                let negate = matches!(node.op, Op::Sub { .. });
                for (v, sign) in [(*a, false), (*b, negate)] {
                    if !rg(v) {
                        continue;
                    }
                    let mut d: Vec<T> = if self.value(v).len() == g.len() {
                        g.to_vec()
                    } else {
                        vec![g.iter().copied().sum()]
                    };
                    if sign {
                        d.iter_mut().for_each(|x| *x = -*x);
                    }
                    add(v, d);
                }
            }
            Op::Scale { input, factor } => add(*input, g.iter().map(|&x| x * *factor).collect()),
            Op::Mean { input } => {
                let n = self.value(*input).len();
                let v = g[0] / T::of_f64(n as f64);
                add(*input, vec![v; n]);
            }
            Op::L1 { a, b } => {
                let (da, db) = (self.value(*a), self.value(*b));
                let scale = g[0] / T::of_f64(da.len() as f64);
                let d: Vec<T> = da
                    .iter()
                    .zip(db)
                    .map(|(&x, &y)| {
                        let diff = x - y;
                        if diff > T::zero() {
                            scale
                        } else if diff < T::zero() {
                            -scale
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                if rg(*b) {
                    add(*b, d.iter().map(|&x| -x).collect());
                }
                add(*a, d);
            }
            Op::BceLogits { logits, target } => {
                let z = self.value(*logits);
                let scale = g[0] / T::of_f64(z.len() as f64);
                let d = z
                    .iter()
                    .map(|&z| (sigmoid(z) - *target) * scale)
                    .collect();
                add(*logits, d);
            }
            Op::Reshape { input } => add(*input, g.to_vec()),
            Op::Concat {
                inputs,
                outer,
                inner,
            } => {
                let total_c: usize = g.len() / (outer * inner);
                let mut offset = 0;
                for &v in inputs {
                    let c = self.value(v).len() / (outer * inner);
                    if rg(v) {
                        let mut d = Vec::with_capacity(outer * c * inner);
                        for o in 0..*outer {
                            let start = (o * total_c + offset) * inner;
                            d.extend_from_slice(&g[start..start + c * inner]);
                        }
                        add(v, d);
                    }
                    offset += c;
                }
            }
            Op::UpsampleNearest { input, factor } => {
                let shape = self.shape(*input);
                let r = shape.len();
                let (h, w) = (shape[r - 2], shape[r - 1]);
                let planes = self.value(*input).len() / (h * w);
                let (ho, wo) = (h * factor, w * factor);
                let mut d = vec![T::zero(); planes * h * w];
                for p in 0..planes {
                    for y in 0..ho {
                        for x in 0..wo {
                            let di = (p * h + y / factor) * w + x / factor;
                            d[di] = d[di] + g[(p * ho + y) * wo + x];
                        }
                    }
                }
                add(*input, d);
            }
            Op::Linear {
                input,
                weight,
                bias,
            } => {
                let (si, sw) = (self.shape(*input), self.shape(*weight));
                let (b, f, o) = (si[0], si[1], sw[0]);
                if rg(*input) {
                    let mut d = vec![T::zero(); b * f];
                    super::scalar::matmul(b, o, f, g, false, self.value(*weight), false, &mut d, false);
                    add(*input, d);
                }
                if rg(*weight) {
                    let mut d = vec![T::zero(); o * f];
                    super::scalar::matmul(o, b, f, g, true, self.value(*input), false, &mut d, false);
                    add(*weight, d);
                }
                if let Some(bv) = bias {
                    if rg(*bv) {
                        let mut d = vec![T::zero(); o];
                        for row in g.chunks(o) {
                            for (acc, &x) in d.iter_mut().zip(row) {
                                *acc = *acc + x;
                            }
                        }
                        add(*bv, d);
                    }
                }
            }
        }
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn mean_gradient_is_uniform() {
        let mut tape = Tape::<f64>::new();
        let w = tape.variable(&t(&[4], &[1.0, -2.0, 3.0, 0.5]));
        let m = tape.mean(w);
        let grads = tape.backward(m).unwrap();
        assert_eq!(grads.get(w).unwrap(), &[0.25; 4]);
    }

    #[test]
    fn l1_of_identical_is_zero() {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(&t(&[3], &[0.1, 0.2, 0.3]));
        let l = tape.l1_loss(a, a).unwrap();
        assert_eq!(tape.item(l).unwrap(), 0.0);
    }

    #[test]
    fn l1_constant_offset() {
        let mut tape = Tape::<f64>::new();
        let x = t(&[5], &[0.0, 0.3, 0.5, 0.7, 0.9]);
        let a = tape.constant(&x);
        let b = tape.constant(&x.map(|v| v + 0.1));
        let l = tape.l1_loss(a, b).unwrap();
        assert!((tape.item(l).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn bce_at_zero_logit_is_ln2() {
        let mut tape = Tape::<f64>::new();
        let z = tape.constant(&t(&[1], &[0.0]));
        let l = tape.bce_with_logits(z, 1.0).unwrap();
        assert!((tape.item(l).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn bce_is_stable_for_huge_logits() {
        let mut tape = Tape::<f32>::new();
        let z = tape.variable(&Tensor::from_vec(vec![2], vec![500.0f32, -500.0]).unwrap());
        let l = tape.bce_with_logits(z, 1.0).unwrap();
        let v = tape.item(l).unwrap();
        assert!(v.is_finite());
        assert!((v - 250.0).abs() < 1e-3);
        let g = tape.backward(l).unwrap();
        assert!(g.get(z).unwrap().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::<f64>::new();
        let w = tape.variable(&t(&[2], &[1.0, 2.0]));
        let y = tape.scalar_mul(w, 2.0);
        assert!(tape.backward(y).is_err());
    }

    #[test]
    fn backward_rejects_constant_loss() {
        let mut tape = Tape::<f64>::new();
        let w = tape.constant(&t(&[2], &[1.0, 2.0]));
        let m = tape.mean(w);
        assert!(tape.backward(m).is_err());
    }

    #[test]
    fn fan_out_sums_gradients() {
        let mut tape = Tape::<f64>::new();
        let w = tape.variable(&t(&[2], &[1.0, 2.0]));
        let a = tape.scalar_mul(w, 3.0);
        let s = tape.add(a, w).unwrap();
        let m = tape.mean(s);
        let g = tape.backward(m).unwrap();
        assert_eq!(g.get(w).unwrap(), &[2.0, 2.0]);
    }

    #[test]
    fn scalar_broadcast_add() {
        let mut tape = Tape::<f64>::new();
        let a = tape.variable(&t(&[3], &[1.0, 2.0, 3.0]));
        let b = tape.variable(&t(&[1], &[10.0]));
        let s = tape.add(a, b).unwrap();
        assert_eq!(tape.value(s), &[11.0, 12.0, 13.0]);
        let m = tape.mean(s);
        let g = tape.backward(m).unwrap();
        assert!((g.get(b).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(tape_shape_mismatch_is_error());
    }

    fn tape_shape_mismatch_is_error() -> bool {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(&t(&[3], &[1.0, 2.0, 3.0]));
        let b = tape.constant(&t(&[2], &[1.0, 2.0]));
        tape.add(a, b).is_err() && tape.l1_loss(a, b).is_err()
    }

    #[test]
    fn detach_blocks_gradient() {
        let mut tape = Tape::<f64>::new();
        let w = tape.variable(&t(&[2], &[1.0, 2.0]));
        let d = tape.detach(w);
        let s = tape.add(w, d).unwrap();
        let m = tape.mean(s);
        let g = tape.backward(m).unwrap();
        assert_eq!(g.get(w).unwrap(), &[0.5, 0.5]);
        assert!(g.get(d).is_none());
    }

    #[test]
    fn concat_routes_gradients_back() {
        let mut tape = Tape::<f64>::new();
        let a = tape.variable(&t(&[1, 1, 1, 2], &[1.0, 2.0]));
        let b = tape.variable(&t(&[1, 2, 1, 2], &[3.0, 4.0, 5.0, 6.0]));
        let c = tape.concat_channels(&[a, b]).unwrap();
        assert_eq!(tape.shape(c), &[1, 3, 1, 2]);
        assert_eq!(tape.value(c), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        // Weight each channel differently so the routing is visible.
        let w = tape.constant(&t(&[1, 3, 1, 1], &[1.0, 10.0, 100.0]));
        let y = tape.conv2d(c, w, None, Padding::Zero, 1).unwrap();
        let m = tape.mean(y);
        let g = tape.backward(m).unwrap();
        assert_eq!(g.get(a).unwrap(), &[0.5, 0.5]);
        assert_eq!(g.get(b).unwrap(), &[5.0, 5.0, 50.0, 50.0]);
    }
}
