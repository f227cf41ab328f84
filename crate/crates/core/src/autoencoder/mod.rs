//! Convolutional autoencoder with hand-written forward and backward passes.
//!
//! Encoder: five `conv3x3 → ReLU → avgpool2` stages taking 3×32×32 down to a
//! 32×1×1 latent. Decoder: five `upsample2 → convT3x3 → ReLU` stages, the last
//! with a sigmoid. All convolutions use stride 1 and padding 1, so the pooling
//! and upsampling steps carry the spatial reduction.

mod adam;
mod checkpoint;
mod layers;
mod loss;
mod model;
mod tensor;
mod train;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use layers::{
    avgpool2_backward, avgpool2_forward, conv2d_backward, conv2d_forward, upsample2_backward,
    upsample2_forward, Activation, ConvGrads, ConvKind, ConvLayer,
};
pub use loss::{bce_grad, bce_loss, BCE_EPSILON};
pub use model::{Architecture, AutoencoderModel, ModelGrads, Trace};
pub use tensor::Tensor4;
pub use train::{lr_for_epoch, train, write_loss_csv, EpochStats, TrainConfig, TrainOutcome};

/// Floating-point element type: `f32` for training, `f64` for gradient checks.
pub trait Real:
    Float + FromPrimitive + AddAssign + Sum + Default + Debug + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}
