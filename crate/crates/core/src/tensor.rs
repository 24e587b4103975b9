//! Dense 3-D tensors and the typed fields built on them.
//!
//! Every tensor is stored row-major by `(i, j, c)`: `i` walks the width,
//! `j` the height and `c` the channels, with `c` varying fastest.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};

/// Lower bound on every standard deviation held by a [`ScaleField`].
pub const THETA_FLOOR: f64 = 1e-3;

/// Lower clamp applied to ratios produced by [`ScalingField::from_ratio`].
pub const BETA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl Dims {
    pub const fn new(width: usize, height: usize, channels: usize) -> Self {
        Dims { width, height, channels }
    }

    pub const fn len(&self) -> usize {
        self.width * self.height * self.channels
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn positions(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub const fn index(&self, i: usize, j: usize, c: usize) -> usize {
        (i * self.height + j) * self.channels + c
    }

    /// Inverse of [`Dims::index`].
    #[inline]
    pub const fn coords(&self, index: usize) -> (usize, usize, usize) {
        let c = index % self.channels;
        let p = index / self.channels;
        (p / self.height, p % self.height, c)
    }

    pub(crate) fn expect(&self, other: Dims) -> Result<()> {
        if *self == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: *self, found: other })
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    dims: Dims,
    data: Vec<T>,
}

impl<T: Copy> Tensor3<T> {
    pub fn from_vec(dims: Dims, data: Vec<T>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch { dims, len: data.len() });
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn filled(dims: Dims, value: T) -> Self {
        Tensor3 { dims, data: vec![value; dims.len()] }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for i in 0..dims.width {
            for j in 0..dims.height {
                for c in 0..dims.channels {
                    data.push(f(i, j, c));
                }
            }
        }
        Tensor3 { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, c: usize) -> T {
        self.data[self.dims.index(i, j, c)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, c: usize, value: T) {
        let idx = self.dims.index(i, j, c);
        self.data[idx] = value;
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Tensor3<U> {
        Tensor3 { dims: self.dims, data: self.data.iter().copied().map(f).collect() }
    }
}

impl Tensor3<f64> {
    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

/// Real-valued feature tensor `y` of shape `(W_y, H_y, C_y)`.
pub type FeatureTensor = Tensor3<f64>;

/// Integer-valued output of the unit-step quantizer.
pub type QuantizedTensor = Tensor3<i32>;

/// Per-element standard deviations; every value is at least [`THETA_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleField(Tensor3<f64>);

impl ScaleField {
    /// Wraps `values`, raising anything below the floor up to [`THETA_FLOOR`].
    pub fn new(values: Tensor3<f64>) -> Result<Self> {
        values.check_finite()?;
        if let Some(index) = values.as_slice().iter().position(|v| *v < 0.0) {
            return Err(invalid(alloc::format!("negative scale at flat index {index}")));
        }
        Ok(ScaleField(values.map(|v| v.max(THETA_FLOOR))))
    }

    pub fn constant(dims: Dims, theta: f64) -> Result<Self> {
        Self::new(Tensor3::filled(dims, theta))
    }

    pub fn dims(&self) -> Dims {
        self.0.dims()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn tensor(&self) -> &Tensor3<f64> {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, c: usize) -> f64 {
        self.0.get(i, j, c)
    }
}

/// Per-element scaling `β` of the source-coder distortion model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingField {
    values: Tensor3<f64>,
    clamped_high: usize,
}

impl ScalingField {
    /// Builds `β = clamp(θ^c / θ^r, BETA_FLOOR, 1)`.
    pub fn from_ratio(theta_c: &ScaleField, theta_r: &ScaleField) -> Result<Self> {
        theta_r.dims().expect(theta_c.dims())?;
        let mut clamped_high = 0;
        let data = theta_c
            .as_slice()
            .iter()
            .zip(theta_r.as_slice())
            .map(|(c, r)| {
                let ratio = c / r;
                if ratio > 1.0 {
                    clamped_high += 1;
                }
                ratio.clamp(BETA_FLOOR, 1.0)
            })
            .collect();
        Ok(ScalingField { values: Tensor3::from_vec(theta_c.dims(), data)?, clamped_high })
    }

    /// Takes explicit values in `[0, 1]`, including the fully distorted `β = 0`.
    pub fn from_values(values: Tensor3<f64>) -> Result<Self> {
        values.check_finite()?;
        if let Some(index) = values.as_slice().iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid(alloc::format!("scaling outside [0, 1] at flat index {index}")));
        }
        Ok(ScalingField { values, clamped_high: 0 })
    }

    pub fn constant(dims: Dims, beta: f64) -> Result<Self> {
        Self::from_values(Tensor3::filled(dims, beta))
    }

    pub fn dims(&self) -> Dims {
        self.values.dims()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// Number of elements whose raw ratio exceeded 1 and was clamped.
    pub fn clamped_high(&self) -> usize {
        self.clamped_high
    }
}

/// RGB image of shape `(W, H, 3)` with nominal range `[0, 255]`.
///
/// Values outside the range are accepted so that pre-clamp reconstructions
/// can be inspected; [`ImageTensor::clamped`] restores the range.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor(Tensor3<f64>);

impl ImageTensor {
    pub fn new(pixels: Tensor3<f64>) -> Result<Self> {
        if pixels.dims().channels != 3 {
            return Err(invalid("image tensors carry exactly 3 channels"));
        }
        pixels.check_finite()?;
        Ok(ImageTensor(pixels))
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        ImageTensor(Tensor3::filled(Dims::new(width, height, 3), value))
    }

    pub fn width(&self) -> usize {
        self.0.dims().width
    }

    pub fn height(&self) -> usize {
        self.0.dims().height
    }

    pub fn dims(&self) -> Dims {
        self.0.dims()
    }

    pub fn pixels(&self) -> &Tensor3<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.0.get(x, y, channel)
    }

    pub fn clamped(&self) -> Self {
        ImageTensor(self.0.map(|v| v.clamp(0.0, 255.0)))
    }

    /// Top-left `width x height` window, used to undo padding.
    pub fn crop(&self, width: usize, height: usize) -> Result<Self> {
        if width > self.width() || height > self.height() {
            return Err(invalid("crop larger than image"));
        }
        Ok(ImageTensor(Tensor3::from_fn(Dims::new(width, height, 3), |x, y, c| self.0.get(x, y, c))))
    }
}
