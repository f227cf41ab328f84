use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::layers::{
    pool_backward_sample, pool_sample, upsample_backward_sample, upsample_sample,
};
use super::loss::{bce_grad_into, bce_sum};
use super::{Activation, ConvKind, ConvLayer, Real, Tensor4};

/// Channel plan shared by encoder and (mirrored) decoder.
///
/// `channels[0]` is the image channel count and `channels.last()` the latent
/// channel count; each entry pair is one encoder stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    channels: Vec<usize>,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            channels: vec![3, 8, 16, 32, 32, 32],
        }
    }
}

impl Architecture {
    pub fn new(channels: Vec<usize>) -> Result<Self> {
        if channels.len() < 2 || channels.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "channel plan {channels:?} needs at least two positive entries"
            )));
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn stages(&self) -> usize {
        self.channels.len() - 1
    }

    pub fn image_channels(&self) -> usize {
        self.channels[0]
    }

    pub fn latent_channels(&self) -> usize {
        *self.channels.last().unwrap()
    }

    /// Spatial reduction factor of the encoder.
    pub fn reduction(&self) -> usize {
        1 << self.stages()
    }

    /// Values in one latent for a square input of side `side`.
    pub fn latent_len(&self, side: usize) -> usize {
        let s = side / self.reduction();
        self.latent_channels() * s * s
    }
}

/// Per-layer parameter gradients (encoder layers, then decoder layers) and the
/// gradient w.r.t. the input batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads<T> {
    pub layers: Vec<(Vec<T>, Vec<T>)>,
    pub input: Tensor4<T>,
}

impl<T: Real> ModelGrads<T> {
    /// Gradient slices in parameter order: weights then bias, layer by layer.
    pub fn slices(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect()
    }
}

/// Every intermediate value of one sample's forward pass.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    /// Input of each encoder convolution.
    pub enc_inputs: Vec<Vec<T>>,
    /// Activated output of each encoder convolution (before pooling).
    pub enc_outputs: Vec<Vec<T>>,
    /// Upsampled input of each decoder convolution.
    pub dec_inputs: Vec<Vec<T>>,
    /// Activated output of each decoder convolution.
    pub dec_outputs: Vec<Vec<T>>,
    pub latent: Vec<T>,
    /// Spatial side of each encoder stage's convolution.
    pub enc_sides: Vec<usize>,
}

impl<T: Real> Trace<T> {
    pub fn output(&self) -> &[T] {
        self.dec_outputs.last().expect("at least one decoder stage")
    }

    /// On/off pattern of every ReLU unit, used to detect kink crossings.
    pub fn relu_pattern<'a>(&'a self, model: &'a AutoencoderModel<T>) -> Vec<bool> {
        let mut mask = Vec::new();
        for (layer, out) in model.encoder.iter().zip(&self.enc_outputs) {
            if layer.activation() == Activation::Relu {
                mask.extend(out.iter().map(|&v| v > T::zero()));
            }
        }
        for (layer, out) in model.decoder.iter().zip(&self.dec_outputs) {
            if layer.activation() == Activation::Relu {
                mask.extend(out.iter().map(|&v| v > T::zero()));
            }
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel<T> {
    encoder: Vec<ConvLayer<T>>,
    decoder: Vec<ConvLayer<T>>,
    seed: u64,
}

impl<T: Real> AutoencoderModel<T> {
    /// Seeded uniform fan-in initialization.
    pub fn new(arch: &Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(arch, seed, |kind, act, i, o| {
            ConvLayer::uniform(kind, act, i, o, &mut rng)
        })
    }

    /// All weights and biases zero.
    pub fn zeros(arch: &Architecture) -> Self {
        Self::build(arch, 0, ConvLayer::zeros)
    }

    fn build(
        arch: &Architecture,
        seed: u64,
        mut make: impl FnMut(ConvKind, Activation, usize, usize) -> ConvLayer<T>,
    ) -> Self {
        let ch = arch.channels();
        let n = arch.stages();
        let encoder = (0..n)
            .map(|i| make(ConvKind::Conv, Activation::Relu, ch[i], ch[i + 1]))
            .collect();
        let decoder = (0..n)
            .map(|i| {
                let act = if i + 1 == n {
                    Activation::Sigmoid
                } else {
                    Activation::Relu
                };
                make(ConvKind::ConvTranspose, act, ch[n - i], ch[n - i - 1])
            })
            .collect();
        Self {
            encoder,
            decoder,
            seed,
        }
    }

    /// Assembles a model from explicit layers, checking that channel counts
    /// chain and mirror.
    pub fn from_layers(
        encoder: Vec<ConvLayer<T>>,
        decoder: Vec<ConvLayer<T>>,
        seed: u64,
    ) -> Result<Self> {
        if encoder.is_empty() || encoder.len() != decoder.len() {
            return Err(Error::Shape(format!(
                "{} encoder vs {} decoder layers",
                encoder.len(),
                decoder.len()
            )));
        }
        if encoder.iter().any(|l| l.kind() != ConvKind::Conv)
            || decoder.iter().any(|l| l.kind() != ConvKind::ConvTranspose)
        {
            return Err(Error::Shape("layer kinds out of order".into()));
        }
        let chain = |layers: &[ConvLayer<T>]| {
            layers.windows(2).all(|w| w[0].out_ch() == w[1].in_ch())
        };
        let mirrored = encoder
            .iter()
            .zip(decoder.iter().rev())
            .all(|(e, d)| e.in_ch() == d.out_ch() && e.out_ch() == d.in_ch());
        if !chain(&encoder) || !chain(&decoder) || !mirrored {
            return Err(Error::Shape("channel counts do not chain".into()));
        }
        Ok(Self {
            encoder,
            decoder,
            seed,
        })
    }

    pub fn architecture(&self) -> Architecture {
        let mut ch = vec![self.encoder[0].in_ch()];
        ch.extend(self.encoder.iter().map(ConvLayer::out_ch));
        Architecture { channels: ch }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn encoder(&self) -> &[ConvLayer<T>] {
        &self.encoder
    }

    pub fn decoder(&self) -> &[ConvLayer<T>] {
        &self.decoder
    }

    /// Encoder layers followed by decoder layers.
    pub fn layers(&self) -> impl Iterator<Item = &ConvLayer<T>> {
        self.encoder.iter().chain(&self.decoder)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut ConvLayer<T>> {
        self.encoder.iter_mut().chain(&mut self.decoder)
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(ConvLayer::param_count).sum()
    }

    /// Mutable parameter slices in the same order as [`ModelGrads::slices`].
    pub fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for layer in self.layers_mut() {
            let (w, b) = layer.params_mut();
            out.push(w);
            out.push(b);
        }
        out
    }

    pub fn cast<U: Real>(&self) -> AutoencoderModel<U> {
        AutoencoderModel {
            encoder: self.encoder.iter().map(ConvLayer::cast).collect(),
            decoder: self.decoder.iter().map(ConvLayer::cast).collect(),
            seed: self.seed,
        }
    }

    fn check_input(&self, x: &Tensor4<T>) -> Result<()> {
        let arch = self.architecture();
        let [_, c, h, w] = x.shape();
        let r = arch.reduction();
        if c != arch.image_channels() || h != w || h % r != 0 {
            return Err(Error::Shape(format!(
                "input {:?}: expected (B, {}, S, S) with S a multiple of {r}",
                x.shape(),
                arch.image_channels()
            )));
        }
        Ok(())
    }

    fn encode_sample(&self, x: &[T], side: usize) -> Vec<T> {
        let mut a = x.to_vec();
        let mut s = side;
        for layer in &self.encoder {
            let y = layer.forward_sample(&a, s, s);
            a = pool_sample(&y, layer.out_ch(), s, s);
            s /= 2;
        }
        a
    }

    fn decode_sample(&self, z: &[T], side: usize) -> Vec<T> {
        let mut a = z.to_vec();
        let mut s = side;
        for layer in &self.decoder {
            let u = upsample_sample(&a, layer.in_ch(), 2 * s, 2 * s);
            s *= 2;
            a = layer.forward_sample(&u, s, s);
        }
        a
    }

    /// Maps `(B, C, S, S)` images to `(B, latent_ch, S/2^L, S/2^L)` latents.
    pub fn encode(&self, x: &Tensor4<T>) -> Result<Tensor4<T>> {
        self.check_input(x)?;
        let side = x.height();
        let out_side = side / self.architecture().reduction();
        let parts: Vec<Vec<T>> = x
            .data()
            .par_chunks_exact(x.sample_len())
            .map(|s| self.encode_sample(s, side))
            .collect();
        Ok(Tensor4::concat(
            [self.architecture().latent_channels(), out_side, out_side],
            parts,
        ))
    }

    /// Maps latents back to images; the terminal sigmoid keeps outputs in (0,1).
    pub fn decode(&self, z: &Tensor4<T>) -> Result<Tensor4<T>> {
        let arch = self.architecture();
        let [_, c, h, w] = z.shape();
        if c != arch.latent_channels() || h != w {
            return Err(Error::Shape(format!(
                "latent {:?}: expected (B, {}, s, s)",
                z.shape(),
                arch.latent_channels()
            )));
        }
        let out_side = h * arch.reduction();
        let parts: Vec<Vec<T>> = z
            .data()
            .par_chunks_exact(z.sample_len())
            .map(|s| self.decode_sample(s, h))
            .collect();
        Ok(Tensor4::concat(
            [arch.image_channels(), out_side, out_side],
            parts,
        ))
    }

    /// Forward pass of one `(C, S, S)` sample keeping every intermediate.
    pub fn trace(&self, x: &[T], side: usize) -> Trace<T> {
        let mut enc_inputs = Vec::new();
        let mut enc_outputs = Vec::new();
        let mut enc_sides = Vec::new();
        let mut a = x.to_vec();
        let mut s = side;
        for layer in &self.encoder {
            let y = layer.forward_sample(&a, s, s);
            let pooled = pool_sample(&y, layer.out_ch(), s, s);
            enc_inputs.push(std::mem::replace(&mut a, pooled));
            enc_outputs.push(y);
            enc_sides.push(s);
            s /= 2;
        }
        let latent = a.clone();
        let mut dec_inputs = Vec::new();
        let mut dec_outputs = Vec::new();
        for layer in &self.decoder {
            let u = upsample_sample(&a, layer.in_ch(), 2 * s, 2 * s);
            s *= 2;
            a = layer.forward_sample(&u, s, s);
            dec_inputs.push(u);
            dec_outputs.push(a.clone());
        }
        Trace {
            enc_inputs,
            enc_outputs,
            dec_inputs,
            dec_outputs,
            latent,
            enc_sides,
        }
    }

    /// Backpropagates `grad_output` (w.r.t. the reconstruction) through one
    /// traced sample. Parameter gradients are accumulated into `grads`.
    fn backward_sample(
        &self,
        trace: &Trace<T>,
        grad_output: Vec<T>,
        grads: &mut [(Vec<T>, Vec<T>)],
    ) -> Vec<T> {
        let n = self.encoder.len();
        let (enc_grads, dec_grads) = grads.split_at_mut(n);
        let mut g = grad_output;
        let mut s = trace.enc_sides[0];
        for (i, layer) in self.decoder.iter().enumerate().rev() {
            let mut g_pre = g;
            layer
                .activation()
                .backward(&trace.dec_outputs[i], &mut g_pre);
            let mut gx = vec![T::zero(); trace.dec_inputs[i].len()];
            let (gw, gb) = &mut dec_grads[i];
            layer.backward_pre(&trace.dec_inputs[i], s, s, &g_pre, &mut gx, gw, gb);
            g = upsample_backward_sample(&gx, layer.in_ch(), s, s);
            s /= 2;
        }
        for (i, layer) in self.encoder.iter().enumerate().rev() {
            let side = trace.enc_sides[i];
            let mut g_pre = pool_backward_sample(&g, layer.out_ch(), side, side);
            layer
                .activation()
                .backward(&trace.enc_outputs[i], &mut g_pre);
            let mut gx = vec![T::zero(); trace.enc_inputs[i].len()];
            let (gw, gb) = &mut enc_grads[i];
            layer.backward_pre(&trace.enc_inputs[i], side, side, &g_pre, &mut gx, gw, gb);
            g = gx;
        }
        g
    }

    fn zero_grads(&self) -> Vec<(Vec<T>, Vec<T>)> {
        self.layers()
            .map(|l| (vec![T::zero(); l.weights().len()], vec![T::zero(); l.out_ch()]))
            .collect()
    }

    /// Mean BCE of `decode(encode(x))` against `target`, with exact gradients
    /// for every parameter and for `x`.
    ///
    /// Samples run in parallel; their gradients are summed in sample order, so
    /// the result does not depend on the thread count.
    pub fn loss_and_grads(
        &self,
        x: &Tensor4<T>,
        target: &Tensor4<T>,
    ) -> Result<(f64, ModelGrads<T>)> {
        self.check_input(x)?;
        if x.shape() != target.shape() {
            return Err(Error::Shape(format!(
                "input {:?} vs target {:?}",
                x.shape(),
                target.shape()
            )));
        }
        let side = x.height();
        let len = x.sample_len();
        let scale = 1.0 / x.data().len() as f64;
        let per_sample: Vec<_> = x
            .data()
            .par_chunks_exact(len)
            .zip(target.data().par_chunks_exact(len))
            .map(|(xs, ts)| {
                let trace = self.trace(xs, side);
                let loss = bce_sum(trace.output(), ts);
                let g_out = bce_grad_into(trace.output(), ts, scale);
                let mut grads = self.zero_grads();
                let gx = self.backward_sample(&trace, g_out, &mut grads);
                (loss, grads, gx)
            })
            .collect();

        let mut total = 0.0;
        let mut layers = self.zero_grads();
        let mut input = Vec::with_capacity(x.data().len());
        for (loss, grads, gx) in per_sample {
            total += loss;
            for ((aw, ab), (gw, gb)) in layers.iter_mut().zip(grads) {
                aw.iter_mut().zip(gw).for_each(|(a, g)| *a += g);
                ab.iter_mut().zip(gb).for_each(|(a, g)| *a += g);
            }
            input.extend(gx);
        }
        Ok((
            total * scale,
            ModelGrads {
                layers,
                input: Tensor4::from_vec(x.shape(), input)?,
            },
        ))
    }

    /// Mean BCE of `decode(encode(x))` against `target` without gradients.
    pub fn loss(&self, x: &Tensor4<T>, target: &Tensor4<T>) -> Result<f64> {
        let recon = self.decode(&self.encode(x)?)?;
        super::bce_loss(&recon, target)
    }
}
