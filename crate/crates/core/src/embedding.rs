//! Word vectors: the concatenated latents of a word's image-set.
//!
//! Tables are stored either as text (`N D` header, then `word v1 ... vD`) or as
//! a little-endian binary file starting with `DFVE`.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::autoencoder::{AutoencoderModel, Tensor4};
use crate::error::{Error, Result};
use crate::imageset::{Image, ImageSet, ImageSource, IMAGE_CHANNELS, IMAGE_SIDE};
use crate::vocab::{Vocabulary, PAD};
use crate::{IMAGES_PER_TERM, IMAGES_PER_WORD};

pub const TABLE_MAGIC: &[u8; 4] = b"DFVE";
pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbedding {
    pub word: String,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Binary,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "binary" => Ok(TableFormat::Binary),
            other => Err(Error::InvalidArgument(format!(
                "table format {other:?} (expected text or binary)"
            ))),
        }
    }
}

/// Ordered word vectors of one dimension, unique by word.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: Vec<WordEmbedding>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, row: WordEmbedding) -> Result<()> {
        if row.vector.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector for {:?} has {} components, table has {}",
                row.word,
                row.vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&row.word) {
            return Err(Error::DuplicateWord(row.word));
        }
        self.index.insert(row.word.clone(), self.rows.len());
        self.rows.push(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[WordEmbedding] {
        &self.rows
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.rows[i].vector.as_slice())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.word.as_str())
    }

    /// Copy with every nonzero vector scaled to unit L2 norm.
    pub fn l2_normalized(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            let norm = row
                .vector
                .iter()
                .map(|&v| (v as f64) * (v as f64))
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                row.vector.iter_mut().for_each(|v| *v = (*v as f64 / norm) as f32);
            }
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<table>", e);
        writeln!(out, "{} {}", self.rows.len(), self.dim).map_err(io)?;
        for row in &self.rows {
            let mut line = String::with_capacity(row.word.len() + 16 * self.dim);
            line.push_str(&row.word);
            for v in &row.vector {
                // 9 significant digits round-trip any f32
                line.push_str(&format!(" {v:.8e}"));
            }
            line.push('\n');
            out.write_all(line.as_bytes()).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R, origin: &Path) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(origin, e))?,
            None => return Err(Error::parse(origin, 1, "missing header")),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parsed: Option<(usize, usize)> = match fields.as_slice() {
            [n, d] => n.parse().ok().zip(d.parse().ok()),
            _ => None,
        };
        let (count, dim) =
            parsed.ok_or_else(|| Error::parse(origin, 1, "header must be `<count> <dim>`"))?;
        let mut table = EmbeddingTable::new(dim);
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts.next().unwrap_or_default().to_string();
            let vector = parts
                .map(str::parse::<f32>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(origin, line_no, format!("bad component: {e}")))?;
            if vector.len() != dim {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("expected {dim} components, found {}", vector.len()),
                ));
            }
            table.push(WordEmbedding { word, vector }).map_err(|e| match e {
                Error::DuplicateWord(w) => {
                    Error::parse(origin, line_no, format!("duplicate word {w:?}"))
                }
                other => other,
            })?;
        }
        if table.len() != count {
            return Err(Error::Malformed(format!(
                "{}: header announces {count} rows, found {}",
                origin.display(),
                table.len()
            )));
        }
        Ok(table)
    }

    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(16 + self.rows.len() * (8 + 4 * self.dim));
        out.extend_from_slice(TABLE_MAGIC);
        out.extend_from_slice(&TABLE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rows.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for row in &self.rows {
            let len = u16::try_from(row.word.len())
                .map_err(|_| Error::InvalidArgument(format!("word too long: {:?}", row.word)))?;
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(row.word.as_bytes());
            for v in &row.vector {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != TABLE_MAGIC {
            return Err(Error::Malformed("not a defvec embedding table".into()));
        }
        let mut pos = 4;
        let mut take = |n: usize| -> Result<&[u8]> {
            let end = pos + n;
            if end > bytes.len() {
                return Err(Error::Malformed("truncated embedding table".into()));
            }
            let s = &bytes[pos..end];
            pos = end;
            Ok(s)
        };
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap());
        let version = u32_at(take(4)?);
        if version != TABLE_VERSION {
            return Err(Error::Version {
                found: version,
                expected: TABLE_VERSION,
            });
        }
        let count = u32_at(take(4)?) as usize;
        let dim = u32_at(take(4)?) as usize;
        let mut table = EmbeddingTable::new(dim);
        for _ in 0..count {
            let len = u16::from_le_bytes(take(2)?.try_into().unwrap()) as usize;
            let word = std::str::from_utf8(take(len)?)
                .map_err(|_| Error::Malformed("word is not UTF-8".into()))?
                .to_string();
            let vector = take(4 * dim)?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            table.push(WordEmbedding { word, vector })?;
        }
        if take(1).is_ok() {
            return Err(Error::Malformed("trailing bytes after table".into()));
        }
        Ok(table)
    }
}

pub fn save_table(table: &EmbeddingTable, path: impl AsRef<Path>, format: TableFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        TableFormat::Binary => table.to_binary()?,
        TableFormat::Text => {
            let mut buf = Vec::new();
            table.write_text(&mut buf)?;
            buf
        }
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads either format, detected from the leading magic bytes.
pub fn load_table(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut head = [0u8; 4];
    let n = file.read(&mut head).map_err(|e| Error::io(path, e))?;
    if n == 4 && &head == TABLE_MAGIC {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        return EmbeddingTable::from_binary(&bytes);
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingTable::read_text(BufReader::new(file), path)
}

fn stack(images: &[&Image]) -> Result<Tensor4<f32>> {
    Tensor4::from_samples(
        [IMAGE_CHANNELS, IMAGE_SIDE, IMAGE_SIDE],
        images.iter().map(|i| i.pixels()),
    )
}

/// Encodes all 100 images and concatenates the latents in image-set order.
pub fn embed_word(model: &AutoencoderModel<f32>, image_set: &ImageSet) -> Result<WordEmbedding> {
    let images: Vec<&Image> = image_set.images().iter().collect();
    let latents = model.encode(&stack(&images)?)?;
    Ok(WordEmbedding {
        word: image_set.word().to_string(),
        vector: latents.into_data(),
    })
}

/// One row per base word, in vocabulary order.
///
/// Latents are computed once per distinct term and shared; the result is
/// identical to calling [`embed_word`] on each assembled image-set.
pub fn embed_vocabulary(
    model: &AutoencoderModel<f32>,
    vocab: &Vocabulary,
    source: &dyn ImageSource,
) -> Result<EmbeddingTable> {
    let latent_len = model.architecture().latent_len(IMAGE_SIDE);
    let dim = IMAGES_PER_WORD * latent_len;

    let mut terms: BTreeSet<&str> = BTreeSet::new();
    for entry in vocab.entries() {
        terms.insert(entry.word());
        terms.extend(entry.real_terms().iter().map(String::as_str));
    }
    let terms: Vec<&str> = terms.into_iter().collect();
    let encoded: Vec<Vec<f32>> = terms
        .par_iter()
        .map(|term| {
            let images = source.images_for(term)?;
            let refs: Vec<&Image> = images.iter().collect();
            Ok(model.encode(&stack(&refs)?)?.into_data())
        })
        .collect::<Result<_>>()?;
    let cache: HashMap<&str, Vec<f32>> = terms.into_iter().zip(encoded).collect();
    let blank = Image::blank();
    let blank_latent = model.encode(&stack(&[&blank])?)?.into_data();

    let mut table = EmbeddingTable::new(dim);
    for entry in vocab.entries() {
        let mut vector = Vec::with_capacity(dim);
        vector.extend_from_slice(&cache[entry.word()]);
        for term in entry.terms() {
            if term == PAD {
                for _ in 0..IMAGES_PER_TERM {
                    vector.extend_from_slice(&blank_latent);
                }
            } else {
                vector.extend_from_slice(&cache[term.as_str()]);
            }
        }
        log::debug!("embedded {}", entry.word());
        table.push(WordEmbedding {
            word: entry.word().to_string(),
            vector,
        })?;
    }
    Ok(table)
}
