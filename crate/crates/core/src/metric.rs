//! GVIF: preserved over reference information through a Gaussian visual
//! channel, plus the masked PSNR used for region fidelity.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{analyze_image, ImportanceSource};
use crate::error::{invalid, Error, Result};
use crate::filter::{build_filter_set, FilterSet, IndexSet};
use crate::gsm::{apply_coder_profile, compute_scaling_field, CoderProfile};
use crate::tensor::{ImageTensor, ScaleField, ScalingField};
use crate::transform::ExtractorConfig;

/// Variance of the additive visual noise, in squared feature units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvsParams {
    gamma2: f64,
}

impl Default for HvsParams {
    fn default() -> Self {
        HvsParams { gamma2: 0.1 }
    }
}

impl HvsParams {
    pub fn new(gamma2: f64) -> Result<Self> {
        if gamma2.is_finite() && gamma2 > 0.0 {
            Ok(HvsParams { gamma2 })
        } else {
            Err(invalid("visual noise variance must be positive"))
        }
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
}

/// `1/2 log2(1 + s^2 / gamma^2)` for signal scale `s`.
#[inline]
pub fn channel_bits(scale: f64, gamma2: f64) -> f64 {
    0.5 * libm::log1p(scale * scale / gamma2) / core::f64::consts::LN_2
}

/// Information the reference features carry through the visual channel.
pub fn reference_information(theta_r: &ScaleField, hvs: &HvsParams) -> f64 {
    theta_r.as_slice().iter().map(|&t| channel_bits(t, hvs.gamma2)).sum()
}

/// Information kept by the distorted features; only elements of `set`
/// contribute, generated elements being independent of the reference.
pub fn distorted_information(
    theta_r: &ScaleField,
    beta: &ScalingField,
    set: &impl IndexSet,
    hvs: &HvsParams,
) -> Result<f64> {
    theta_r.dims().expect(beta.dims())?;
    theta_r.dims().expect(set.dims())?;
    Ok(theta_r
        .as_slice()
        .iter()
        .zip(beta.as_slice())
        .enumerate()
        .filter(|(idx, _)| set.contains_flat(*idx))
        .map(|(_, (&t, &b))| channel_bits(b * t, hvs.gamma2))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGvif {
    pub numerator_bits: f64,
    pub denominator_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvifReport {
    pub numerator_bits: f64,
    pub denominator_bits: f64,
    pub value: f64,
    pub per_channel: Vec<ChannelGvif>,
    /// Scaling entries clamped down to 1.
    pub clamped_beta: usize,
}

impl GvifReport {
    /// Numerator and denominator averaged over feature channels.
    pub fn channel_averages(&self) -> (f64, f64) {
        let n = self.per_channel.len().max(1) as f64;
        (self.numerator_bits / n, self.denominator_bits / n)
    }
}

pub fn gvif(theta_r: &ScaleField, beta: &ScalingField, set: &impl IndexSet, hvs: &HvsParams) -> Result<GvifReport> {
    let d = theta_r.dims();
    d.expect(beta.dims())?;
    d.expect(set.dims())?;
    let mut per_channel = vec![ChannelGvif { numerator_bits: 0.0, denominator_bits: 0.0 }; d.channels];
    for (idx, (&t, &b)) in theta_r.as_slice().iter().zip(beta.as_slice()).enumerate() {
        let ch = &mut per_channel[idx % d.channels];
        ch.denominator_bits += channel_bits(t, hvs.gamma2);
        if set.contains_flat(idx) {
            ch.numerator_bits += channel_bits(b * t, hvs.gamma2);
        }
    }
    let numerator_bits = distorted_information(theta_r, beta, set, hvs)?;
    let denominator_bits = reference_information(theta_r, hvs);
    if !denominator_bits.is_normal() {
        return Err(Error::Degenerate("reference information is zero"));
    }
    Ok(GvifReport {
        numerator_bits,
        denominator_bits,
        value: numerator_bits / denominator_bits,
        per_channel,
        clamped_beta: beta.clamped_high(),
    })
}

/// GVIF of coding `x` with `profile` at threshold `alpha`: the reference
/// scale field comes from the reference coder, the coded one from the
/// profile, and the selected set from the importance source.
pub fn gvif_for_image(
    x: &ImageTensor,
    profile: &CoderProfile,
    alpha: f64,
    cfg: &ExtractorConfig,
    hvs: &HvsParams,
    importance: &ImportanceSource<'_>,
) -> Result<GvifReport> {
    let a = analyze_image(x, cfg, importance)?;
    let theta_c = apply_coder_profile(&a.theta_r, profile)?;
    let beta = compute_scaling_field(&theta_c, &a.theta_r)?;
    let set = build_filter_set(&a.importance, alpha, a.features.dims().channels)?;
    gvif(&a.theta_r, &beta, &set, hvs)
}

/// Binary pixel mask of an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(invalid("pixel mask length does not match dims"));
        }
        Ok(PixelMask { width, height, bits })
    }

    pub fn full(width: usize, height: usize) -> Self {
        PixelMask { width, height, bits: vec![true; width * height] }
    }

    /// Nearest-neighbour upsampling of a feature-grid set by the block size,
    /// cropped to the image size.
    pub fn from_filter_set(set: &FilterSet, block: usize, width: usize, height: usize) -> Result<Self> {
        if set.width() * block < width || set.height() * block < height {
            return Err(invalid("filter set too small for image"));
        }
        let mut bits = Vec::with_capacity(width * height);
        for x in 0..width {
            for y in 0..height {
                bits.push(set.contains_position(x / block, y / block));
            }
        }
        Ok(PixelMask { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.height + y]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Reported PSNR when the masked error is exactly zero.
pub const PSNR_CAP_DB: f64 = 100.0;

/// `10 log10(255^2 / MSE)` over the masked pixels of all three colors.
pub fn mask_psnr(x: &ImageTensor, x_hat: &ImageTensor, mask: &PixelMask) -> Result<f64> {
    x.dims().expect(x_hat.dims())?;
    if (mask.width, mask.height) != (x.width(), x.height()) {
        return Err(invalid("mask dims differ from image dims"));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for px in 0..x.width() {
        for py in 0..x.height() {
            if !mask.get(px, py) {
                continue;
            }
            for c in 0..3 {
                let e = x.get(px, py, c) - x_hat.get(px, py, c);
                sum += e * e;
            }
            n += 3;
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let mse = sum / n as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * libm::log10(255.0 * 255.0 / mse)).min(PSNR_CAP_DB))
}
