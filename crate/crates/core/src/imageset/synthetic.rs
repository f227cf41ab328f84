use super::{Image, ImageSource, TermImages, IMAGE_LEN, IMAGE_SIDE};
use crate::error::Result;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit FNV-1a over the term's UTF-8 bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based stream: draw `i` is a pure function of `(key, i)`.
struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    fn new(seed: u64, term_hash: u64, slot: u64) -> Self {
        let key = mix(seed) ^ mix(term_hash.rotate_left(17)) ^ mix(slot.wrapping_add(1).wrapping_mul(GOLDEN));
        Self { key, counter: 0 }
    }

    fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0,1).
    fn unit(&mut self) -> f32 {
        ((self.next_u64() >> 40) as f32) / (1u64 << 24) as f32
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// A saturated channel value within 0.05 of black or white.
    fn level(&mut self) -> f32 {
        let spread = 0.05 * self.unit();
        if self.below(2) == 0 {
            spread
        } else {
            1.0 - spread
        }
    }
}

/// Deterministic stand-in for photographs: every (seed, term, slot) maps to a
/// background color with a couple of filled rectangles and disks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSource {
    seed: u64,
}

impl SyntheticSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn image(&self, term: &str, slot: usize) -> Image {
        let mut rng = Stream::new(self.seed, fnv1a64(term.as_bytes()), slot as u64);
        let side = IMAGE_SIDE;
        let plane = side * side;
        let mut pixels = vec![0.0f32; IMAGE_LEN];
        for c in 0..3 {
            let v = rng.level();
            pixels[c * plane..(c + 1) * plane].fill(v);
        }
        let shapes = 1 + rng.below(3);
        for _ in 0..shapes {
            let disk = rng.below(2) == 0;
            let cy = rng.below(side as u64) as f32;
            let cx = rng.below(side as u64) as f32;
            let ry = 3.0 + rng.below(10) as f32;
            let rx = 3.0 + rng.below(10) as f32;
            let color = [rng.level(), rng.level(), rng.level()];
            for y in 0..side {
                for x in 0..side {
                    let dy = (y as f32 - cy) / ry;
                    let dx = (x as f32 - cx) / rx;
                    let inside = if disk {
                        dy * dy + dx * dx <= 1.0
                    } else {
                        dy.abs() <= 1.0 && dx.abs() <= 1.0
                    };
                    if inside {
                        for (c, &v) in color.iter().enumerate() {
                            pixels[c * plane + y * side + x] = v;
                        }
                    }
                }
            }
        }
        Image::from_pixels(pixels).expect("synthetic pixels are in range")
    }
}

impl ImageSource for SyntheticSource {
    fn images_for(&self, term: &str) -> Result<TermImages> {
        Ok(std::array::from_fn(|k| self.image(term, k)))
    }
}
