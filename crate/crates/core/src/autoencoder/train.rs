use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imageset::{Image, IMAGE_CHANNELS, IMAGE_SIDE};

use super::{adam_step, AdamState, Architecture, AutoencoderModel, Tensor4};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr0: f64,
    /// Epochs between learning-rate halvings.
    pub lr_halving_period: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 25,
            lr0: 0.00215,
            lr_halving_period: 5,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.lr_halving_period == 0 {
            return Err(Error::InvalidArgument(
                "epochs, batch_size and lr_halving_period must be positive".into(),
            ));
        }
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return Err(Error::InvalidArgument(format!("bad lr0 {}", self.lr0)));
        }
        Ok(())
    }

    pub fn lr(&self, epoch: usize) -> f64 {
        lr_for_epoch(self.lr0, self.lr_halving_period, epoch)
    }
}

/// `lr0 · 2^(-⌊epoch / period⌋)`, with `epoch` counted from zero. Halving is
/// exact in binary floating point.
pub fn lr_for_epoch(lr0: f64, period: usize, epoch: usize) -> f64 {
    lr0 / 2f64.powi((epoch / period) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AutoencoderModel<f32>,
    pub adam: AdamState<f32>,
    pub history: Vec<EpochStats>,
}

/// `epoch,lr,mean_loss` with a header row.
pub fn write_loss_csv<W: Write>(history: &[EpochStats], mut out: W) -> io::Result<()> {
    writeln!(out, "epoch,lr,mean_loss")?;
    for s in history {
        writeln!(out, "{},{},{}", s.epoch, s.lr, s.mean_loss)?;
    }
    Ok(())
}

/// Trains `model` to reconstruct `images` under mean BCE with Adam.
///
/// Each epoch visits a fresh permutation drawn from a generator seeded once
/// with `cfg.seed`. The reported epoch loss is the mean over all images.
pub fn train(
    mut model: AutoencoderModel<f32>,
    images: &[Image],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if images.is_empty() {
        return Err(Error::Empty("training image pool".into()));
    }
    let arch: Architecture = model.architecture();
    if arch.image_channels() != IMAGE_CHANNELS || IMAGE_SIDE % arch.reduction() != 0 {
        return Err(Error::Shape(format!(
            "architecture {:?} does not fit {IMAGE_CHANNELS}x{IMAGE_SIDE}x{IMAGE_SIDE} images",
            arch.channels()
        )));
    }
    let sizes: Vec<usize> = model.param_slices_mut().iter().map(|s| s.len()).collect();
    let mut adam = AdamState::new(&sizes, cfg.lr0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..images.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        adam.lr = cfg.lr(epoch);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let x = Tensor4::from_samples(
                [IMAGE_CHANNELS, IMAGE_SIDE, IMAGE_SIDE],
                batch.iter().map(|&i| images[i].pixels()),
            )?;
            let (loss, grads) = model.loss_and_grads(&x, &x)?;
            loss_sum += loss * batch.len() as f64;
            adam_step(&mut model.param_slices_mut(), &grads.slices(), &mut adam)?;
        }
        let mean_loss = loss_sum / images.len() as f64;
        log::info!("epoch {epoch}: lr {} mean loss {mean_loss:.6}", adam.lr);
        history.push(EpochStats {
            epoch,
            lr: adam.lr,
            mean_loss,
        });
    }
    Ok(TrainOutcome {
        model,
        adam,
        history,
    })
}
