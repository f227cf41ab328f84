//! Binary PPM (P6) with 8-bit samples.

use crate::error::{Error, Result};
use std::path::Path;

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height * 3, "raster size");
        Self {
            width,
            height,
            maxval: 255,
            data,
        }
    }

    pub fn solid(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self::new(width, height, data)
    }

    /// Channel-major planes scaled to [0,1] by `maxval`.
    pub fn to_planes(&self) -> Vec<f32> {
        let n = self.width * self.height;
        let scale = self.maxval as f32;
        let mut planes = vec![0.0; 3 * n];
        for (i, px) in self.data.chunks_exact(3).enumerate() {
            for c in 0..3 {
                planes[c * n + i] = px[c] as f32 / scale;
            }
        }
        planes
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("missing {what}"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what}"))
    }
}

pub fn decode_ppm(bytes: &[u8], origin: &Path) -> Result<RgbImage> {
    let corrupt = |message: String| Error::Image {
        path: origin.to_path_buf(),
        message,
    };
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(corrupt("not a binary PPM (P6)".into()));
    }
    let mut header = Header { bytes, pos: 2 };
    let width = header.number("width").map_err(corrupt)?;
    let height = header.number("height").map_err(corrupt)?;
    let maxval = header.number("maxval").map_err(corrupt)?;
    if width == 0 || height == 0 {
        return Err(corrupt(format!("empty raster {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(corrupt(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(corrupt("missing raster separator".into())),
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| corrupt("raster too large".into()))?;
    let raster = &bytes[header.pos..];
    if raster.len() < len {
        return Err(corrupt(format!(
            "truncated raster: {} of {len} bytes",
            raster.len()
        )));
    }
    let data = raster[..len].to_vec();
    if data.iter().any(|&b| b as usize > maxval) {
        return Err(corrupt("sample exceeds maxval".into()));
    }
    Ok(RgbImage {
        width,
        height,
        maxval: maxval as u16,
        data,
    })
}

pub fn encode_ppm(image: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n{}\n", image.width, image.height, image.maxval).into_bytes();
    out.extend_from_slice(&image.data);
    out
}
