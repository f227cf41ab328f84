//! Binary checkpoint, little-endian:
//!
//! ```text
//! "DFVC" u32 version u64 seed u32 layer_count
//! per layer: u8 kind u8 activation u32 in_ch u32 out_ch f32[weights] f32[bias]
//! u8 has_adam [u64 step, f32[m] per parameter, f32[v] per parameter]
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Activation, AdamState, AutoencoderModel, ConvKind, ConvLayer};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"DFVC";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: AutoencoderModel<f32>,
    pub adam: Option<AdamState<f32>>,
}

fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_checkpoint(model: &AutoencoderModel<f32>, adam: Option<&AdamState<f32>>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&model.seed().to_le_bytes());
    let layers: Vec<_> = model.layers().collect();
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for layer in layers {
        out.push(match layer.kind() {
            ConvKind::Conv => 0,
            ConvKind::ConvTranspose => 1,
        });
        out.push(match layer.activation() {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Sigmoid => 2,
        });
        out.extend_from_slice(&(layer.in_ch() as u32).to_le_bytes());
        out.extend_from_slice(&(layer.out_ch() as u32).to_le_bytes());
        put_f32s(&mut out, layer.weights());
        put_f32s(&mut out, layer.bias());
    }
    match adam {
        None => out.push(0),
        Some(state) => {
            out.push(1);
            out.extend_from_slice(&state.step.to_le_bytes());
            for m in &state.m {
                put_f32s(&mut out, m);
            }
            for v in &state.v {
                put_f32s(&mut out, v);
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Malformed("truncated checkpoint".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let len = n
            .checked_mul(4)
            .ok_or_else(|| Error::Malformed("array too large".into()))?;
        Ok(self
            .take(len)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let seed = r.u64()?;
    let count = r.u32()? as usize;
    let mut encoder = Vec::new();
    let mut decoder = Vec::new();
    for _ in 0..count {
        let kind = match r.u8()? {
            0 => ConvKind::Conv,
            1 => ConvKind::ConvTranspose,
            k => return Err(Error::Malformed(format!("unknown layer kind {k}"))),
        };
        let activation = match r.u8()? {
            0 => Activation::Identity,
            1 => Activation::Relu,
            2 => Activation::Sigmoid,
            a => return Err(Error::Malformed(format!("unknown activation {a}"))),
        };
        let in_ch = r.u32()? as usize;
        let out_ch = r.u32()? as usize;
        let n_weights = in_ch
            .checked_mul(out_ch)
            .and_then(|n| n.checked_mul(9))
            .ok_or_else(|| Error::Malformed("layer too large".into()))?;
        let weights = r.f32s(n_weights)?;
        let bias = r.f32s(out_ch)?;
        let layer = ConvLayer::new(kind, activation, in_ch, out_ch, weights, bias)?;
        match kind {
            ConvKind::Conv => encoder.push(layer),
            ConvKind::ConvTranspose => decoder.push(layer),
        }
    }
    let mut model = AutoencoderModel::from_layers(encoder, decoder, seed)?;
    let adam = match r.u8()? {
        0 => None,
        1 => {
            let step = r.u64()?;
            let sizes: Vec<usize> = model.param_slices_mut().iter().map(|s| s.len()).collect();
            let mut state = AdamState::new(&sizes, super::TrainConfig::default().lr0);
            state.step = step;
            for (m, &n) in state.m.iter_mut().zip(&sizes) {
                *m = r.f32s(n)?;
            }
            for (v, &n) in state.v.iter_mut().zip(&sizes) {
                *v = r.f32s(n)?;
            }
            Some(state)
        }
        f => return Err(Error::Malformed(format!("bad optimizer flag {f}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::Malformed(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(Checkpoint { model, adam })
}

pub fn save_checkpoint(
    model: &AutoencoderModel<f32>,
    adam: Option<&AdamState<f32>>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(model, adam)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::Architecture;

    fn sample() -> (AutoencoderModel<f32>, AdamState<f32>) {
        let mut model = AutoencoderModel::new(&Architecture::default(), 77);
        let sizes: Vec<usize> = model.param_slices_mut().iter().map(|s| s.len()).collect();
        let mut adam = AdamState::new(&sizes, 0.00215);
        adam.step = 1234;
        adam.m[3][0] = 0.5;
        adam.v[7][1] = 1e-9;
        (model, adam)
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let (model, adam) = sample();
        let bytes = encode_checkpoint(&model, Some(&adam));
        let loaded = decode_checkpoint(&bytes).unwrap();
        assert_eq!(loaded.model, model);
        let state = loaded.adam.as_ref().unwrap();
        assert_eq!(state.step, 1234);
        assert_eq!(state.m, adam.m);
        assert_eq!(state.v, adam.v);
        assert_eq!(encode_checkpoint(&loaded.model, loaded.adam.as_ref()), bytes);

        let bare = encode_checkpoint(&model, None);
        assert!(decode_checkpoint(&bare).unwrap().adam.is_none());
    }

    #[test]
    fn rejects_bad_files() {
        let (model, adam) = sample();
        let bytes = encode_checkpoint(&model, Some(&adam));

        let mut bad = bytes.clone();
        bad[0] = b'X';
        let err = decode_checkpoint(&bad).unwrap_err();
        assert_eq!(err.to_string(), "not a defvec checkpoint");

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(
            decode_checkpoint(&bad),
            Err(Error::Version { found: 2, .. })
        ));

        assert!(matches!(
            decode_checkpoint(&bytes[..bytes.len() - 3]),
            Err(Error::Malformed(_))
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode_checkpoint(&long).is_err());
    }
}
