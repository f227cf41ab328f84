//! Seeded inputs shared by the benchmarks.

use defvec::autoencoder::{Activation, ConvKind, ConvLayer, Tensor4};
use defvec::imageset::SyntheticSource;
use defvec::{EmbeddingTable, WordEmbedding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tensor(seed: u64, shape: [usize; 4]) -> Tensor4<f32> {
    let mut r = rng(seed);
    let n = shape.iter().product();
    Tensor4::from_vec(shape, (0..n).map(|_| r.random::<f32>()).collect()).unwrap()
}

pub fn layer(seed: u64, kind: ConvKind, in_ch: usize, out_ch: usize) -> ConvLayer<f32> {
    let mut r = rng(seed);
    let w = (0..out_ch * in_ch * 9).map(|_| r.random_range(-0.3..0.3)).collect();
    ConvLayer::new(kind, Activation::Relu, in_ch, out_ch, w, vec![0.0; out_ch]).unwrap()
}

/// A batch of synthetic images stacked as `[n, 3, 32, 32]`.
pub fn image_batch(seed: u64, n: usize) -> Tensor4<f32> {
    let source = SyntheticSource::new(seed);
    let images: Vec<_> = (0..n).map(|i| source.image(&format!("w{i}"), i % 5)).collect();
    Tensor4::from_samples([3, 32, 32], images.iter().map(|i| i.pixels())).unwrap()
}

pub fn table(seed: u64, rows: usize, dim: usize) -> EmbeddingTable {
    let mut r = rng(seed);
    let mut table = EmbeddingTable::new(dim);
    for i in 0..rows {
        let vector = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        table.push(WordEmbedding { word: format!("w{i}"), vector }).unwrap();
    }
    table
}
