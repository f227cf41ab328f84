//! Image sources and per-word image-sets.
//!
//! An [`ImageSet`] is the word's own five images followed by five images per
//! definition term, 100 in total. Padding terms contribute the all-zeros
//! [`Image::blank`] without consulting the source.

mod ppm;
mod resize;
mod synthetic;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::vocab::{DefinitionEntry, Vocabulary, PAD};
use crate::{IMAGES_PER_TERM, IMAGES_PER_WORD};

pub use ppm::{decode_ppm, encode_ppm, RgbImage};
pub use resize::resize_bilinear;
pub use synthetic::{fnv1a64, SyntheticSource};

pub const IMAGE_CHANNELS: usize = 3;
pub const IMAGE_SIDE: usize = 32;
pub const IMAGE_LEN: usize = IMAGE_CHANNELS * IMAGE_SIDE * IMAGE_SIDE;

/// A 3×32×32 RGB image, channel-major, values in [0,1].
#[derive(Clone, PartialEq)]
pub struct Image {
    pixels: Box<[f32]>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sum: f32 = self.pixels.iter().sum();
        f.debug_struct("Image").field("sum", &sum).finish()
    }
}

impl Image {
    pub fn blank() -> Self {
        Self {
            pixels: vec![0.0; IMAGE_LEN].into_boxed_slice(),
        }
    }

    pub fn from_pixels(pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != IMAGE_LEN {
            return Err(Error::Shape(format!(
                "image needs {IMAGE_LEN} values, got {}",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "pixel value {bad} outside [0,1]"
            )));
        }
        Ok(Self {
            pixels: pixels.into_boxed_slice(),
        })
    }

    /// Decodes a PPM raster of any size and resizes it to 32×32.
    pub fn from_rgb(image: &RgbImage) -> Self {
        let planes = image.to_planes();
        let pixels = resize_bilinear(
            &planes,
            IMAGE_CHANNELS,
            image.height,
            image.width,
            IMAGE_SIDE,
            IMAGE_SIDE,
        );
        Self {
            pixels: pixels.into_boxed_slice(),
        }
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn get(&self, channel: usize, row: usize, col: usize) -> f32 {
        self.pixels[(channel * IMAGE_SIDE + row) * IMAGE_SIDE + col]
    }

    pub fn is_blank(&self) -> bool {
        self.pixels.iter().all(|&v| v == 0.0)
    }
}

pub fn blank_image() -> Image {
    Image::blank()
}

/// The five images of one term.
pub type TermImages = [Image; IMAGES_PER_TERM];

/// Supplies exactly five images per term. Implementations must be
/// deterministic and safe to call from several threads.
pub trait ImageSource: Send + Sync {
    fn images_for(&self, term: &str) -> Result<TermImages>;
}

impl<S: ImageSource + ?Sized> ImageSource for &S {
    fn images_for(&self, term: &str) -> Result<TermImages> {
        (**self).images_for(term)
    }
}

impl<S: ImageSource + ?Sized> ImageSource for Box<S> {
    fn images_for(&self, term: &str) -> Result<TermImages> {
        (**self).images_for(term)
    }
}

fn blank_term() -> TermImages {
    std::array::from_fn(|_| Image::blank())
}

/// Directory name used for a term: ASCII punctuation is percent-encoded
/// (`,` becomes `%2C`), everything else is kept as is.
pub fn term_dir_name(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    for c in term.chars() {
        if c.is_ascii_punctuation() {
            out.push_str(&format!("%{:02X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

/// Reads `<root>/<term>/<k>.ppm` for k in 0..5.
///
/// Terms with fewer than five files repeat their last available image; terms
/// with none get five blanks. Every shortfall is recorded in the coverage
/// report.
#[derive(Debug)]
pub struct DirectorySource {
    root: PathBuf,
    coverage: Mutex<BTreeMap<String, usize>>,
}

impl DirectorySource {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(Error::io(
                &root,
                io::Error::new(io::ErrorKind::NotFound, "image root is not a directory"),
            ));
        }
        Ok(Self {
            root,
            coverage: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Terms seen so far with fewer than five images, sorted by term.
    pub fn coverage_report(&self) -> Vec<(String, usize)> {
        let guard = self.coverage.lock().unwrap_or_else(|e| e.into_inner());
        guard.iter().map(|(t, n)| (t.clone(), *n)).collect()
    }

    /// `term<TAB>found_count` for every short term.
    pub fn write_coverage_report<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (term, found) in self.coverage_report() {
            writeln!(out, "{term}\t{found}")?;
        }
        Ok(())
    }

    fn load(path: &Path) -> Result<Image> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Image::from_rgb(&decode_ppm(&bytes, path)?))
    }
}

impl ImageSource for DirectorySource {
    fn images_for(&self, term: &str) -> Result<TermImages> {
        let dir = self.root.join(term_dir_name(term));
        let mut found = Vec::with_capacity(IMAGES_PER_TERM);
        for k in 0..IMAGES_PER_TERM {
            let path = dir.join(format!("{k}.ppm"));
            if path.is_file() {
                found.push(Self::load(&path)?);
            }
        }
        let count = found.len();
        if count < IMAGES_PER_TERM {
            self.coverage
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .insert(term.to_string(), count);
        }
        let Some(last) = found.last().cloned() else {
            return Ok(blank_term());
        };
        found.resize(IMAGES_PER_TERM, last);
        Ok(found.try_into().expect("exactly five images"))
    }
}

/// One word's ordered 100-image stack.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    word: String,
    images: Vec<Image>,
}

impl ImageSet {
    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    /// Replaces one image; used to probe slot correspondence.
    pub fn with_image(mut self, index: usize, image: Image) -> Self {
        self.images[index] = image;
        self
    }
}

pub fn assemble_image_set(entry: &DefinitionEntry, source: &dyn ImageSource) -> Result<ImageSet> {
    let mut images = Vec::with_capacity(IMAGES_PER_WORD);
    images.extend(source.images_for(entry.word())?);
    for term in entry.terms() {
        if term == PAD {
            images.extend(blank_term());
        } else {
            images.extend(source.images_for(term)?);
        }
    }
    debug_assert_eq!(images.len(), IMAGES_PER_WORD);
    Ok(ImageSet {
        word: entry.word().to_string(),
        images,
    })
}

/// Images of every distinct vocabulary term (base words and definition
/// terms) in vocabulary order. PAD slots contribute nothing.
pub fn training_pool(vocab: &Vocabulary, source: &dyn ImageSource) -> Result<Vec<Image>> {
    let mut pool = Vec::with_capacity(vocab.all_words().len() * IMAGES_PER_TERM);
    for term in vocab.all_words() {
        pool.extend(source.images_for(term)?);
    }
    Ok(pool)
}
