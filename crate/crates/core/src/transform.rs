//! Analytic feature extractor: per-color orthonormal block transforms.
//!
//! A `b x b` block at block position `(i, j)` of color `col` contributes
//! coefficient `(k, l)` to channel `col * b^2 + k * b + l` at `(i, j)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::tensor::{Dims, FeatureTensor, ImageTensor, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Orthonormal DCT-II.
    Dct,
    /// Sylvester-ordered Walsh-Hadamard, scaled to be orthonormal.
    WalshHadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractorConfig {
    pub block_size: usize,
    pub scale_window: usize,
    pub basis: Basis,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig { block_size: 8, scale_window: 3, basis: Basis::Dct }
    }
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.block_size.is_power_of_two() {
            return Err(invalid("block size must be a power of two"));
        }
        if self.scale_window.is_multiple_of(2) {
            return Err(invalid("scale window must be odd"));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        3 * self.block_size * self.block_size
    }

    /// Feature dims produced for an image of the given size.
    pub fn feature_dims(&self, width: usize, height: usize) -> Dims {
        let b = self.block_size;
        Dims::new(width.div_ceil(b), height.div_ceil(b), self.channels())
    }

    /// Channel holding the constant (lowest-order) coefficient of `color`.
    pub fn dc_channel(&self, color: usize) -> usize {
        color * self.block_size * self.block_size
    }

    /// `b x b` basis matrix, row `k` holding the `k`-th basis vector.
    pub fn basis_matrix(&self) -> Vec<f64> {
        let b = self.block_size;
        let mut m = vec![0.0; b * b];
        match self.basis {
            Basis::Dct => {
                let bf = b as f64;
                for k in 0..b {
                    let s = if k == 0 { libm::sqrt(1.0 / bf) } else { libm::sqrt(2.0 / bf) };
                    for n in 0..b {
                        let arg = core::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2.0 * bf);
                        m[k * b + n] = s * libm::cos(arg);
                    }
                }
            }
            Basis::WalshHadamard => {
                let s = 1.0 / libm::sqrt(b as f64);
                for k in 0..b {
                    for n in 0..b {
                        let sign = if (k & n).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        m[k * b + n] = s * sign;
                    }
                }
            }
        }
        m
    }
}

/// Size of the image before reflective padding to a block multiple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Padding {
    pub width: usize,
    pub height: usize,
}

impl Padding {
    pub fn is_padded(&self, cfg: &ExtractorConfig) -> bool {
        !self.width.is_multiple_of(cfg.block_size) || !self.height.is_multiple_of(cfg.block_size)
    }
}

/// Half-sample symmetric reflection of `p` into `0..n`.
fn reflect(p: usize, n: usize) -> usize {
    let q = p % (2 * n);
    if q < n {
        q
    } else {
        2 * n - 1 - q
    }
}

pub fn extract_features(image: &ImageTensor, cfg: &ExtractorConfig) -> Result<(FeatureTensor, Padding)> {
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    if w == 0 || h == 0 {
        return Err(invalid("image has no pixels"));
    }
    let b = cfg.block_size;
    let dims = cfg.feature_dims(w, h);
    let m = cfg.basis_matrix();
    let mut out = Tensor3::filled(dims, 0.0);
    let mut block = vec![0.0; b * b];
    let mut tmp = vec![0.0; b * b];
    for bi in 0..dims.width {
        for bj in 0..dims.height {
            for col in 0..3 {
                for x in 0..b {
                    for y in 0..b {
                        let px = reflect(bi * b + x, w);
                        let py = reflect(bj * b + y, h);
                        block[x * b + y] = image.get(px, py, col);
                    }
                }
                // rows of the block along x, columns along y
                for k in 0..b {
                    for y in 0..b {
                        tmp[k * b + y] = (0..b).map(|x| m[k * b + x] * block[x * b + y]).sum();
                    }
                }
                for k in 0..b {
                    for l in 0..b {
                        let v: f64 = (0..b).map(|y| m[l * b + y] * tmp[k * b + y]).sum();
                        out.set(bi, bj, col * b * b + k * b + l, v);
                    }
                }
            }
        }
    }
    Ok((out, Padding { width: w, height: h }))
}

/// Inverse transform without clamping, cropped to the padding record.
pub fn reconstruct_unclamped(features: &FeatureTensor, cfg: &ExtractorConfig, padding: Padding) -> Result<ImageTensor> {
    cfg.validate()?;
    let dims = features.dims();
    let b = cfg.block_size;
    if dims.channels != cfg.channels() {
        return Err(invalid("feature channel count does not match block size"));
    }
    if padding.width > dims.width * b
        || padding.height > dims.height * b
        || padding.width + b <= dims.width * b
        || padding.height + b <= dims.height * b
    {
        return Err(invalid("padding record inconsistent with feature dims"));
    }
    let m = cfg.basis_matrix();
    let mut pixels = Tensor3::filled(Dims::new(dims.width * b, dims.height * b, 3), 0.0);
    let mut tmp = vec![0.0; b * b];
    for bi in 0..dims.width {
        for bj in 0..dims.height {
            for col in 0..3 {
                let base = col * b * b;
                for k in 0..b {
                    for y in 0..b {
                        tmp[k * b + y] = (0..b).map(|l| m[l * b + y] * features.get(bi, bj, base + k * b + l)).sum();
                    }
                }
                for x in 0..b {
                    for y in 0..b {
                        let v: f64 = (0..b).map(|k| m[k * b + x] * tmp[k * b + y]).sum();
                        pixels.set(bi * b + x, bj * b + y, col, v);
                    }
                }
            }
        }
    }
    ImageTensor::new(pixels)?.crop(padding.width, padding.height)
}

pub fn reconstruct_image(features: &FeatureTensor, cfg: &ExtractorConfig, padding: Padding) -> Result<ImageTensor> {
    Ok(reconstruct_unclamped(features, cfg, padding)?.clamped())
}
