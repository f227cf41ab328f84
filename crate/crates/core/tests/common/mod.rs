#![allow(dead_code)]

use defvec::autoencoder::{Activation, ConvKind, ConvLayer, Tensor4};
use defvec::imageset::{Image, ImageSource, SyntheticSource, TermImages, IMAGE_LEN};
use defvec::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod grad;

pub const FD_STEP: f64 = 1e-3;
pub const REL_TOL: f64 = 1e-4;
/// Relative-error denominators never drop below this fraction of the largest
/// analytic component of the gradient under test. Smaller components carry
/// the stencil's truncation error (order h² f''') and are held to an absolute
/// bound of `REL_TOL * REL_FLOOR * max|g|` instead.
pub const REL_FLOOR: f64 = 1e-3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: [usize; 4], lo: f64, hi: f64) -> Tensor4<f64> {
    let n = shape.iter().product();
    Tensor4::from_vec(shape, uniform_vec(rng, n, lo, hi)).unwrap()
}

pub fn random_layer(
    rng: &mut ChaCha8Rng,
    kind: ConvKind,
    act: Activation,
    in_ch: usize,
    out_ch: usize,
) -> ConvLayer<f64> {
    let w = uniform_vec(rng, out_ch * in_ch * 9, -1.0, 1.0);
    let b = uniform_vec(rng, out_ch, -0.5, 0.5);
    ConvLayer::new(kind, act, in_ch, out_ch, w, b).unwrap()
}

pub fn rel_err(analytic: f64, numeric: f64, scale: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(REL_FLOOR * scale);
    if denom == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / denom
    }
}

#[derive(Debug, Clone, Default)]
pub struct GradCheck {
    pub checked: usize,
    /// Components skipped because a ReLU switched inside the difference
    /// stencil.
    pub excluded: usize,
    pub worst: f64,
    pub worst_index: usize,
}

impl GradCheck {
    pub fn merge(&mut self, other: &GradCheck) {
        self.checked += other.checked;
        self.excluded += other.excluded;
        if other.worst > self.worst {
            self.worst = other.worst;
            self.worst_index = other.worst_index;
        }
    }

    pub fn passed(&self) -> bool {
        self.worst <= REL_TOL
    }

    pub fn excluded_fraction(&self) -> f64 {
        let total = self.checked + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }
}

/// Central differences over every component. `eval(i, delta)` returns the
/// objective with component `i` shifted by `delta`, plus the ReLU on/off
/// pattern at that point (empty for smooth maps).
pub fn fd_check(
    analytic: &[f64],
    mut eval: impl FnMut(usize, f64) -> (f64, Vec<bool>),
) -> GradCheck {
    let mut report = GradCheck::default();
    let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, &a) in analytic.iter().enumerate() {
        let (_, base) = eval(i, 0.0);
        let (fp, pp) = eval(i, FD_STEP);
        let (fm, pm) = eval(i, -FD_STEP);
        if pp != base || pm != base {
            report.excluded += 1;
            continue;
        }
        let numeric = (fp - fm) / (2.0 * FD_STEP);
        let e = rel_err(a, numeric, scale);
        report.checked += 1;
        if e > report.worst {
            report.worst = e;
            report.worst_index = i;
        }
    }
    report
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn positive(values: &[f64]) -> Vec<bool> {
    values.iter().map(|&v| v > 0.0).collect()
}

fn activate(act: Activation, v: f64) -> f64 {
    match act {
        Activation::Identity => v,
        Activation::Relu => v.max(0.0),
        Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
    }
}

/// Six nested loops over (b, o, i, j) and (c, u, v). Transposed layers are
/// written as a scatter of each input pixel through the kernel.
pub fn reference_conv(x: &Tensor4<f64>, layer: &ConvLayer<f64>) -> Vec<f64> {
    let [bn, cn, h, w] = x.shape();
    let on = layer.out_ch();
    let mut out = vec![0.0; bn * on * h * w];
    let at = |b: usize, o: usize, i: usize, j: usize| ((b * on + o) * h + i) * w + j;
    for b in 0..bn {
        for o in 0..on {
            for i in 0..h {
                for j in 0..w {
                    out[at(b, o, i, j)] = layer.bias()[o];
                }
            }
        }
    }
    match layer.kind() {
        ConvKind::Conv => {
            for b in 0..bn {
                for o in 0..on {
                    for i in 0..h {
                        for j in 0..w {
                            let mut acc = 0.0;
                            for c in 0..cn {
                                for u in 0..3 {
                                    for v in 0..3 {
                                        let (ii, jj) = (i as isize + u as isize - 1, j as isize + v as isize - 1);
                                        if ii < 0 || jj < 0 || ii >= h as isize || jj >= w as isize {
                                            continue;
                                        }
                                        acc += layer.weight(o, c, u, v) * x.get(b, c, ii as usize, jj as usize);
                                    }
                                }
                            }
                            out[at(b, o, i, j)] += acc;
                        }
                    }
                }
            }
        }
        ConvKind::ConvTranspose => {
            for b in 0..bn {
                for c in 0..cn {
                    for i in 0..h {
                        for j in 0..w {
                            let xv = x.get(b, c, i, j);
                            for o in 0..on {
                                for u in 0..3 {
                                    for v in 0..3 {
                                        let (oi, oj) = (i as isize + u as isize - 1, j as isize + v as isize - 1);
                                        if oi < 0 || oj < 0 || oi >= h as isize || oj >= w as isize {
                                            continue;
                                        }
                                        out[at(b, o, oi as usize, oj as usize)] += layer.weight(o, c, u, v) * xv;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.into_iter().map(|v| activate(layer.activation(), v)).collect()
}

/// Average ranks by counting, O(n²).
pub fn brute_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let below = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn brute_pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

pub fn brute_spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    brute_pearson(&brute_ranks(xs), &brute_ranks(ys))
}

pub fn brute_cosine(u: &[f32], v: &[f32]) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for i in 0..u.len() {
        dot += u[i] as f64 * v[i] as f64;
        nu += u[i] as f64 * u[i] as f64;
        nv += v[i] as f64 * v[i] as f64;
    }
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu.sqrt() * nv.sqrt())
    }
}

/// Index of the least compact vector by explicit double loop.
pub fn brute_outlier(vectors: &[Vec<f32>]) -> usize {
    let n = vectors.len();
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            if i != j {
                sum += brute_cosine(&vectors[i], &vectors[j]);
            }
        }
        let score = sum / (n - 1) as f64;
        if score < best_score {
            best_score = score;
            best = i;
        }
    }
    best
}

/// Images for a word or term are small perturbations of one of a few
/// prototype images, chosen by the term's category.
pub struct PlantedSource {
    prototypes: Vec<Image>,
    categories: Vec<(String, usize)>,
    noise: f32,
    fallback: SyntheticSource,
}

impl PlantedSource {
    pub fn new(prototypes: Vec<Image>, categories: Vec<(String, usize)>, noise: f32) -> Self {
        Self {
            prototypes,
            categories,
            noise,
            fallback: SyntheticSource::new(0),
        }
    }

    fn category(&self, term: &str) -> Option<usize> {
        self.categories
            .iter()
            .find(|(t, _)| t == term)
            .map(|&(_, c)| c)
    }

    pub fn image(&self, term: &str, slot: usize) -> Image {
        let Some(cat) = self.category(term) else {
            return self.fallback.image(term, slot);
        };
        let key = defvec::imageset::fnv1a64(term.as_bytes()) ^ (slot as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut r = rng(key);
        let pixels: Vec<f32> = self.prototypes[cat]
            .pixels()
            .iter()
            .map(|&p| (p + r.random_range(-self.noise..=self.noise)).clamp(0.0, 1.0))
            .collect();
        debug_assert_eq!(pixels.len(), IMAGE_LEN);
        Image::from_pixels(pixels).unwrap()
    }
}

impl ImageSource for PlantedSource {
    fn images_for(&self, term: &str) -> Result<TermImages> {
        Ok(std::array::from_fn(|slot| self.image(term, slot)))
    }
}
