use crate::error::{Error, Result};

use super::Real;

/// Dense `(batch, channel, height, width)` tensor in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4<T> {
    shape: [usize; 4],
    data: Vec<T>,
}

impl<T: Real> Tensor4<T> {
    pub fn zeros(shape: [usize; 4]) -> Self {
        Self {
            shape,
            data: vec![T::zero(); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: [usize; 4], data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected || shape.contains(&0) {
            return Err(Error::Shape(format!(
                "{} values do not fill shape {shape:?}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// Stacks equally sized samples of shape `(c, h, w)`.
    pub fn from_samples<'a, I>(chw: [usize; 3], samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [T]>,
    {
        let len = chw.iter().product::<usize>();
        let mut data = Vec::new();
        let mut batch = 0;
        for s in samples {
            if s.len() != len {
                return Err(Error::Shape(format!(
                    "sample of {} values, expected {chw:?}",
                    s.len()
                )));
            }
            data.extend_from_slice(s);
            batch += 1;
        }
        Self::from_vec([batch, chw[0], chw[1], chw[2]], data)
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn channels(&self) -> usize {
        self.shape[1]
    }

    pub fn height(&self) -> usize {
        self.shape[2]
    }

    pub fn width(&self) -> usize {
        self.shape[3]
    }

    pub fn sample_len(&self) -> usize {
        self.shape[1] * self.shape[2] * self.shape[3]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn sample(&self, b: usize) -> &[T] {
        let n = self.sample_len();
        &self.data[b * n..(b + 1) * n]
    }

    pub fn samples(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.sample_len())
    }

    pub fn get(&self, b: usize, c: usize, i: usize, j: usize) -> T {
        let [_, ch, h, w] = self.shape;
        self.data[((b * ch + c) * h + i) * w + j]
    }

    pub fn cast<U: Real>(&self) -> Tensor4<U> {
        Tensor4 {
            shape: self.shape,
            data: self.data.iter().map(|&v| U::lit(v.to_f64().unwrap())).collect(),
        }
    }

    /// Builds a tensor from per-sample outputs of shape `chw`.
    pub(crate) fn concat(chw: [usize; 3], parts: Vec<Vec<T>>) -> Self {
        let batch = parts.len();
        let mut data = Vec::with_capacity(batch * chw.iter().product::<usize>());
        for p in parts {
            data.extend(p);
        }
        Self {
            shape: [batch, chw[0], chw[1], chw[2]],
            data,
        }
    }
}
