use crate::error::{Error, Result};

use super::{Real, Tensor4};

/// Reconstructions are clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]` before the
/// logarithms.
pub const BCE_EPSILON: f64 = 1e-7;

fn same_shape<T: Real>(a: &Tensor4<T>, b: &Tensor4<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "recon {:?} vs target {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

#[inline]
fn clamp(r: f64) -> f64 {
    r.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON)
}

/// Sum (not mean) of per-element BCE terms, accumulated in `f64`.
pub(crate) fn bce_sum<T: Real>(recon: &[T], target: &[T]) -> f64 {
    recon
        .iter()
        .zip(target)
        .map(|(&r, &t)| {
            let r = clamp(r.to_f64().unwrap());
            let t = t.to_f64().unwrap();
            -(t * r.ln() + (1.0 - t) * (1.0 - r).ln())
        })
        .sum()
}

/// Gradient of `scale * bce_sum` w.r.t. the reconstruction. Zero where the
/// clamp is active.
pub(crate) fn bce_grad_into<T: Real>(recon: &[T], target: &[T], scale: f64) -> Vec<T> {
    recon
        .iter()
        .zip(target)
        .map(|(&r, &t)| {
            let r = r.to_f64().unwrap();
            let t = t.to_f64().unwrap();
            if r < BCE_EPSILON || r > 1.0 - BCE_EPSILON {
                T::zero()
            } else {
                T::lit(scale * (r - t) / (r * (1.0 - r)))
            }
        })
        .collect()
}

/// Mean binary cross-entropy over every element.
pub fn bce_loss<T: Real>(recon: &Tensor4<T>, target: &Tensor4<T>) -> Result<f64> {
    same_shape(recon, target)?;
    Ok(bce_sum(recon.data(), target.data()) / recon.data().len() as f64)
}

/// Gradient of [`bce_loss`] w.r.t. `recon`.
pub fn bce_grad<T: Real>(recon: &Tensor4<T>, target: &Tensor4<T>) -> Result<Tensor4<T>> {
    same_shape(recon, target)?;
    let scale = 1.0 / recon.data().len() as f64;
    Tensor4::from_vec(recon.shape(), bce_grad_into(recon.data(), target.data(), scale))
}
