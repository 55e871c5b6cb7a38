//! Dense row-major tensors of fixed-point values.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

/// Signed 8-bit activations and weights.
pub type QuantTensor = Tensor<i8>;
/// Wide accumulator values.
pub type AccTensor = Tensor<i32>;

impl<T: Copy + Default> Tensor<T> {
    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            data: vec![T::default(); dims.iter().product()],
        }
    }

    pub fn from_vec(dims: &[usize], data: Vec<T>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if expected != data.len() || dims.is_empty() || dims.len() > 4 {
            return Err(Error::ShapeMismatch {
                expected: dims.to_vec(),
                actual: vec![data.len()],
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Same data under new dimensions of equal volume.
    pub fn reshape(mut self, dims: &[usize]) -> Result<Self> {
        if dims.iter().product::<usize>() != self.data.len() {
            return Err(Error::ShapeMismatch {
                expected: dims.to_vec(),
                actual: self.dims,
            });
        }
        self.dims = dims.to_vec();
        Ok(self)
    }

    /// Element at a 3-D index `[c, y, x]`.
    #[inline]
    pub fn at3(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.dims[1] + y) * self.dims[2] + x]
    }

    #[inline]
    pub fn at4(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        self.data[((a * self.dims[1] + b) * self.dims[2] + c) * self.dims[3] + d]
    }
}

impl QuantTensor {
    /// Uniform over the full signed 8-bit range.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: (0..n).map(|_| rng.gen::<i8>()).collect(),
        }
    }

    pub fn widen(&self) -> AccTensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| v as i32).collect(),
        }
    }
}

/// Right shift with round-half-up, on the arithmetic (floor) shift.
#[inline]
pub fn round_shift(x: i32, shift: u32) -> i32 {
    if shift == 0 {
        x
    } else {
        ((x as i64 + (1i64 << (shift - 1))) >> shift) as i32
    }
}

/// Smallest shift after which every value rounds into the signed 8-bit range.
pub fn requant_shift(values: &[i32]) -> u32 {
    let (lo, hi) = values
        .iter()
        .fold((0i32, 0i32), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (0..32)
        .find(|&s| round_shift(hi, s) <= i8::MAX as i32 && round_shift(lo, s) >= i8::MIN as i32)
        .unwrap_or(31)
}

impl AccTensor {
    /// Requantizes to 8 bits with the smallest fitting right shift, rounding
    /// half up and saturating. Returns the tensor and the shift used.
    pub fn requantize(&self) -> (QuantTensor, u32) {
        let shift = requant_shift(&self.data);
        let data = self
            .data
            .iter()
            .map(|&v| round_shift(v, shift).clamp(i8::MIN as i32, i8::MAX as i32) as i8)
            .collect();
        (
            Tensor {
                dims: self.dims.clone(),
                data,
            },
            shift,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_is_checked() {
        assert!(QuantTensor::from_vec(&[2, 3], vec![0; 5]).is_err());
        assert!(QuantTensor::from_vec(&[1, 1, 1, 1, 1], vec![0]).is_err());
        let t = QuantTensor::from_vec(&[2, 3], vec![0; 6]).unwrap();
        assert!(t.clone().reshape(&[7]).is_err());
        assert_eq!(t.reshape(&[6]).unwrap().dims(), &[6]);
    }

    #[test]
    fn round_shift_rounds_half_up() {
        assert_eq!(round_shift(5, 1), 3);
        assert_eq!(round_shift(-5, 1), -2);
        assert_eq!(round_shift(4, 2), 1);
        assert_eq!(round_shift(-6, 2), -1);
        assert_eq!(round_shift(7, 0), 7);
    }

    #[test]
    fn requantize_fits_range() {
        let t = AccTensor::from_vec(&[4], vec![1000, -1000, 3, 0]).unwrap();
        let (q, shift) = t.requantize();
        assert_eq!(shift, 3);
        assert_eq!(q.data(), &[125, -125, 0, 0]);
        let small = AccTensor::from_vec(&[2], vec![127, -128]).unwrap();
        assert_eq!(small.requantize().1, 0);
        let edge = AccTensor::from_vec(&[1], vec![255]).unwrap();
        let (q, s) = edge.requantize();
        assert_eq!((q.data()[0], s), (64, 2));
    }
}
