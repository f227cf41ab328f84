//! Context-independent word vectors built from dictionary definitions.
//!
//! A word is represented by its own images followed by the images of the
//! terms in its (stopword-filtered, truncated, padded) definition. Every image
//! is compressed to a 32-value latent by a small convolutional autoencoder and
//! the latents are concatenated in order, giving a 3200-component vector.
//!
//! The pipeline is split into:
//!
//! - [`vocab`]: dictionary ingestion, tokenization and the closed vocabulary.
//! - [`imageset`]: image sources (PPM directory or synthetic) and the
//!   100-image stack for each word.
//! - [`autoencoder`]: tensors, convolution layers with hand-written backward
//!   passes, BCE loss, Adam and the training loop, plus checkpoints.
//! - [`embedding`]: word vectors and the text/binary table formats.
//! - [`eval`]: similarity (Spearman), outlier detection and concept
//!   categorization (k-means + v-measure).

pub mod autoencoder;
pub mod embedding;
mod error;
pub mod eval;
pub mod imageset;
pub mod vocab;

pub use error::{Error, Result};

pub use autoencoder::{
    AdamState, Architecture, AutoencoderModel, Real, Tensor4, TrainConfig, TrainOutcome,
};
pub use embedding::{EmbeddingTable, TableFormat, WordEmbedding};
pub use eval::{EvalReport, Task};
pub use imageset::{Image, ImageSet, ImageSource};
pub use vocab::{DefinitionEntry, Dictionary, StopwordPolicy, Vocabulary};

/// Number of definition terms kept per word.
pub const MAX_DEFINITION_TERMS: usize = 19;
/// Images collected for every term.
pub const IMAGES_PER_TERM: usize = 5;
/// Images in one word's image-set: the word itself plus its definition terms.
pub const IMAGES_PER_WORD: usize = (MAX_DEFINITION_TERMS + 1) * IMAGES_PER_TERM;
/// Latent width produced by the default encoder.
pub const LATENT_DIM: usize = 32;
/// Dimension of a word embedding with the default encoder.
pub const EMBEDDING_DIM: usize = IMAGES_PER_WORD * LATENT_DIM;
