use rand::Rng;

use crate::error::{Error, Result};

use super::{Real, Tensor4};

pub const KERNEL: usize = 3;
const TAPS: usize = KERNEL * KERNEL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    Conv,
    ConvTranspose,
}

impl ConvKind {
    /// Input offset read by kernel tap `t` (stride 1, padding 1). A transposed
    /// convolution scatters `x[p]` to `out[p + t - 1]`, i.e. reads
    /// `x[i + 1 - t]`.
    #[inline]
    fn offset(self, tap: usize) -> isize {
        match self {
            ConvKind::Conv => tap as isize - 1,
            ConvKind::ConvTranspose => 1 - tap as isize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Real>(self, values: &mut [T]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => values.iter_mut().for_each(|v| *v = v.max(T::zero())),
            Activation::Sigmoid => values
                .iter_mut()
                .for_each(|v| *v = T::one() / (T::one() + (-*v).exp())),
        }
    }

    /// Turns the gradient w.r.t. the activation output into the gradient
    /// w.r.t. its input, given the output `y`.
    pub fn backward<T: Real>(self, y: &[T], grad: &mut [T]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => grad.iter_mut().zip(y).for_each(|(g, &y)| {
                if y <= T::zero() {
                    *g = T::zero();
                }
            }),
            Activation::Sigmoid => grad
                .iter_mut()
                .zip(y)
                .for_each(|(g, &y)| *g = *g * y * (T::one() - y)),
        }
    }
}

/// 3×3, stride 1, padding 1 convolution (or transposed convolution) with a
/// fused activation. Weights are laid out `(out_ch, in_ch, 3, 3)` for both
/// kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T> {
    kind: ConvKind,
    activation: Activation,
    in_ch: usize,
    out_ch: usize,
    weights: Vec<T>,
    bias: Vec<T>,
}

impl<T: Real> ConvLayer<T> {
    pub fn new(
        kind: ConvKind,
        activation: Activation,
        in_ch: usize,
        out_ch: usize,
        weights: Vec<T>,
        bias: Vec<T>,
    ) -> Result<Self> {
        if in_ch == 0 || out_ch == 0 {
            return Err(Error::Shape("layer with zero channels".into()));
        }
        if weights.len() != out_ch * in_ch * TAPS || bias.len() != out_ch {
            return Err(Error::Shape(format!(
                "layer {in_ch}->{out_ch} needs {} weights and {out_ch} biases, got {} and {}",
                out_ch * in_ch * TAPS,
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            kind,
            activation,
            in_ch,
            out_ch,
            weights,
            bias,
        })
    }

    pub fn zeros(kind: ConvKind, activation: Activation, in_ch: usize, out_ch: usize) -> Self {
        Self::new(
            kind,
            activation,
            in_ch,
            out_ch,
            vec![T::zero(); out_ch * in_ch * TAPS],
            vec![T::zero(); out_ch],
        )
        .expect("consistent sizes")
    }

    /// Uniform(-k, k) weights and biases with `k = 1/sqrt(in_ch * 9)`.
    pub fn uniform<R: Rng>(
        kind: ConvKind,
        activation: Activation,
        in_ch: usize,
        out_ch: usize,
        rng: &mut R,
    ) -> Self {
        let k = 1.0 / ((in_ch * TAPS) as f64).sqrt();
        let mut draw = || T::lit(rng.random_range(-k..k));
        let weights = (0..out_ch * in_ch * TAPS).map(|_| draw()).collect();
        let bias = (0..out_ch).map(|_| draw()).collect();
        Self::new(kind, activation, in_ch, out_ch, weights, bias).expect("consistent sizes")
    }

    pub fn kind(&self) -> ConvKind {
        self.kind
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn in_ch(&self) -> usize {
        self.in_ch
    }

    pub fn out_ch(&self) -> usize {
        self.out_ch
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    pub fn params_mut(&mut self) -> (&mut [T], &mut [T]) {
        (&mut self.weights, &mut self.bias)
    }

    pub fn weight(&self, o: usize, c: usize, u: usize, v: usize) -> T {
        self.weights[((o * self.in_ch + c) * KERNEL + u) * KERNEL + v]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn cast<U: Real>(&self) -> ConvLayer<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::lit(x.to_f64().unwrap())).collect();
        ConvLayer {
            kind: self.kind,
            activation: self.activation,
            in_ch: self.in_ch,
            out_ch: self.out_ch,
            weights: conv(&self.weights),
            bias: conv(&self.bias),
        }
    }

    /// Pre-activation output for one `(in_ch, h, w)` sample.
    pub(crate) fn forward_pre(&self, x: &[T], h: usize, w: usize, out: &mut [T]) {
        let plane = h * w;
        debug_assert_eq!(x.len(), self.in_ch * plane);
        debug_assert_eq!(out.len(), self.out_ch * plane);
        for o in 0..self.out_ch {
            let out_o = &mut out[o * plane..(o + 1) * plane];
            out_o.fill(self.bias[o]);
            for c in 0..self.in_ch {
                let x_c = &x[c * plane..(c + 1) * plane];
                for u in 0..KERNEL {
                    let dy = self.kind.offset(u);
                    let (i0, i1) = valid_range(dy, h);
                    for v in 0..KERNEL {
                        let dx = self.kind.offset(v);
                        let (j0, j1) = valid_range(dx, w);
                        let wt = self.weight(o, c, u, v);
                        for i in i0..i1 {
                            let src = (i as isize + dy) as usize * w;
                            let xs = &x_c[(src as isize + j0 as isize + dx) as usize..]
                                [..j1 - j0];
                            let os = &mut out_o[i * w + j0..i * w + j1];
                            for (a, &b) in os.iter_mut().zip(xs) {
                                *a += wt * b;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Forward pass for one sample including the activation.
    pub(crate) fn forward_sample(&self, x: &[T], h: usize, w: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.out_ch * h * w];
        self.forward_pre(x, h, w, &mut out);
        self.activation.apply(&mut out);
        out
    }

    /// Backward pass for one sample given the pre-activation gradient.
    /// Accumulates into `grad_w` and `grad_b`; overwrites `grad_x`.
    pub(crate) fn backward_pre(
        &self,
        x: &[T],
        h: usize,
        w: usize,
        grad_pre: &[T],
        grad_x: &mut [T],
        grad_w: &mut [T],
        grad_b: &mut [T],
    ) {
        let plane = h * w;
        grad_x.fill(T::zero());
        for o in 0..self.out_ch {
            let g_o = &grad_pre[o * plane..(o + 1) * plane];
            grad_b[o] += g_o.iter().copied().sum::<T>();
            for c in 0..self.in_ch {
                let x_c = &x[c * plane..(c + 1) * plane];
                let gx_c = &mut grad_x[c * plane..(c + 1) * plane];
                for u in 0..KERNEL {
                    let dy = self.kind.offset(u);
                    let (i0, i1) = valid_range(dy, h);
                    for v in 0..KERNEL {
                        let dx = self.kind.offset(v);
                        let (j0, j1) = valid_range(dx, w);
                        let widx = ((o * self.in_ch + c) * KERNEL + u) * KERNEL + v;
                        let wt = self.weights[widx];
                        let mut gw = T::zero();
                        for i in i0..i1 {
                            let src = ((i as isize + dy) as usize * w) as isize + j0 as isize + dx;
                            let src = src as usize;
                            let gs = &g_o[i * w + j0..i * w + j1];
                            let xs = &x_c[src..src + (j1 - j0)];
                            for (&g, &xv) in gs.iter().zip(xs) {
                                gw += g * xv;
                            }
                            let gxs = &mut gx_c[src..src + (j1 - j0)];
                            for (a, &g) in gxs.iter_mut().zip(gs) {
                                *a += wt * g;
                            }
                        }
                        grad_w[widx] += gw;
                    }
                }
            }
        }
    }
}

#[inline]
fn valid_range(offset: isize, len: usize) -> (usize, usize) {
    let lo = (-offset).max(0) as usize;
    let hi = (len as isize - offset.max(0)).max(lo as isize) as usize;
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T> {
    pub grad_x: Tensor4<T>,
    pub grad_w: Vec<T>,
    pub grad_b: Vec<T>,
}

fn check_channels<T: Real>(x: &Tensor4<T>, layer: &ConvLayer<T>) -> Result<()> {
    if x.channels() != layer.in_ch {
        return Err(Error::Shape(format!(
            "input {:?} vs layer ({}, {}, 3, 3)",
            x.shape(),
            layer.out_ch,
            layer.in_ch
        )));
    }
    Ok(())
}

/// Applies the layer (convolution or transposed convolution, then its
/// activation) to every sample. Spatial size is preserved.
pub fn conv2d_forward<T: Real>(x: &Tensor4<T>, layer: &ConvLayer<T>) -> Result<Tensor4<T>> {
    check_channels(x, layer)?;
    let [_, _, h, w] = x.shape();
    let parts = x
        .samples()
        .map(|s| layer.forward_sample(s, h, w))
        .collect();
    Ok(Tensor4::concat([layer.out_ch, h, w], parts))
}

/// Exact gradients of [`conv2d_forward`] (activation included) for an upstream
/// gradient `grad_out`. Weight and bias gradients are summed over the batch.
pub fn conv2d_backward<T: Real>(
    x: &Tensor4<T>,
    layer: &ConvLayer<T>,
    grad_out: &Tensor4<T>,
) -> Result<ConvGrads<T>> {
    check_channels(x, layer)?;
    let [b, _, h, w] = x.shape();
    if grad_out.shape() != [b, layer.out_ch, h, w] {
        return Err(Error::Shape(format!(
            "grad_out {:?} vs expected {:?}",
            grad_out.shape(),
            [b, layer.out_ch, h, w]
        )));
    }
    let mut grad_w = vec![T::zero(); layer.weights.len()];
    let mut grad_b = vec![T::zero(); layer.out_ch];
    let mut parts = Vec::with_capacity(b);
    for (xs, gs) in x.samples().zip(grad_out.samples()) {
        let y = layer.forward_sample(xs, h, w);
        let mut g = gs.to_vec();
        layer.activation.backward(&y, &mut g);
        let mut gx = vec![T::zero(); xs.len()];
        layer.backward_pre(xs, h, w, &g, &mut gx, &mut grad_w, &mut grad_b);
        parts.push(gx);
    }
    Ok(ConvGrads {
        grad_x: Tensor4::concat([layer.in_ch, h, w], parts),
        grad_w,
        grad_b,
    })
}

pub(crate) fn pool_sample<T: Real>(x: &[T], c: usize, h: usize, w: usize) -> Vec<T> {
    let (oh, ow) = (h / 2, w / 2);
    let quarter = T::lit(0.25);
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let p = &x[ch * h * w..(ch + 1) * h * w];
        for i in 0..oh {
            let r0 = &p[2 * i * w..];
            let r1 = &p[(2 * i + 1) * w..];
            for j in 0..ow {
                let s = (r0[2 * j] + r0[2 * j + 1]) + (r1[2 * j] + r1[2 * j + 1]);
                out.push(s * quarter);
            }
        }
    }
    out
}

pub(crate) fn pool_backward_sample<T: Real>(g: &[T], c: usize, h: usize, w: usize) -> Vec<T> {
    let (oh, ow) = (h / 2, w / 2);
    let quarter = T::lit(0.25);
    let mut out = vec![T::zero(); c * h * w];
    for ch in 0..c {
        for i in 0..h {
            for j in 0..w {
                out[(ch * h + i) * w + j] = g[(ch * oh + i / 2) * ow + j / 2] * quarter;
            }
        }
    }
    out
}

/// `h`, `w` are the upsampled (output) sizes.
pub(crate) fn upsample_sample<T: Real>(x: &[T], c: usize, h: usize, w: usize) -> Vec<T> {
    let (ih, iw) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * h * w);
    for ch in 0..c {
        for i in 0..h {
            for j in 0..w {
                out.push(x[(ch * ih + i / 2) * iw + j / 2]);
            }
        }
    }
    out
}

/// `h`, `w` are the upsampled sizes of `g`.
pub(crate) fn upsample_backward_sample<T: Real>(g: &[T], c: usize, h: usize, w: usize) -> Vec<T> {
    pool_sample(g, c, h, w)
        .into_iter()
        .map(|v| v * T::lit(4.0))
        .collect()
}

fn even_dims<T: Real>(x: &Tensor4<T>) -> Result<()> {
    if x.height() % 2 != 0 || x.width() % 2 != 0 {
        return Err(Error::Shape(format!(
            "2x2 pooling needs even spatial dims, got {:?}",
            x.shape()
        )));
    }
    Ok(())
}

/// 2×2 mean pooling with stride 2.
pub fn avgpool2_forward<T: Real>(x: &Tensor4<T>) -> Result<Tensor4<T>> {
    even_dims(x)?;
    let [_, c, h, w] = x.shape();
    let parts = x.samples().map(|s| pool_sample(s, c, h, w)).collect();
    Ok(Tensor4::concat([c, h / 2, w / 2], parts))
}

/// Adjoint of [`avgpool2_forward`]; `input_shape` is the pooled input's shape.
pub fn avgpool2_backward<T: Real>(grad_out: &Tensor4<T>, input_shape: [usize; 4]) -> Result<Tensor4<T>> {
    let [b, c, h, w] = input_shape;
    if h % 2 != 0 || w % 2 != 0 || grad_out.shape() != [b, c, h / 2, w / 2] {
        return Err(Error::Shape(format!(
            "pool grad {:?} vs input {input_shape:?}",
            grad_out.shape()
        )));
    }
    let parts = grad_out
        .samples()
        .map(|g| pool_backward_sample(g, c, h, w))
        .collect();
    Ok(Tensor4::concat([c, h, w], parts))
}

/// Nearest-neighbour 2× upsampling.
pub fn upsample2_forward<T: Real>(x: &Tensor4<T>) -> Result<Tensor4<T>> {
    let [_, c, h, w] = x.shape();
    let parts = x
        .samples()
        .map(|s| upsample_sample(s, c, 2 * h, 2 * w))
        .collect();
    Ok(Tensor4::concat([c, 2 * h, 2 * w], parts))
}

/// Adjoint of [`upsample2_forward`]: sums each 2×2 block.
pub fn upsample2_backward<T: Real>(grad_out: &Tensor4<T>) -> Result<Tensor4<T>> {
    even_dims(grad_out)?;
    let [_, c, h, w] = grad_out.shape();
    let parts = grad_out
        .samples()
        .map(|g| upsample_backward_sample(g, c, h, w))
        .collect();
    Ok(Tensor4::concat([c, h / 2, w / 2], parts))
}
