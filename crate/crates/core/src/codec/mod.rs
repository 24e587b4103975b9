//! Quantization, the conditional Gaussian model and entropy coding.

mod features;
pub mod range;
mod side_info;

pub use features::{decode_features, encode_features, ideal_feature_bits, FeatureBitstream, FeatureModel};
pub use side_info::{
    decode_side_info, encode_side_info, grid_index, grid_value, quantize_to_grid, HyperScale, SideInfoBitstream,
    DEFAULT_GRID_STEP,
};

use crate::error::Result;
use crate::filter::{encode_mask, FilterSet};
use crate::tensor::{FeatureTensor, QuantizedTensor, ScaleField};

/// Lower bound on every modeled symbol probability.
pub const P_FLOOR: f64 = 1.0 / (1u64 << 30) as f64;

/// Unit-step quantizer, rounding halves away from zero.
pub fn quantize(features: &FeatureTensor) -> Result<QuantizedTensor> {
    features.check_finite()?;
    Ok(features.map(|v| libm::round(v).clamp(i32::MIN as f64, i32::MAX as f64) as i32))
}

pub fn dequantize(q: &QuantizedTensor) -> FeatureTensor {
    q.map(|k| k as f64)
}

/// Upper tail `P(N(0, theta^2) > x)`.
fn upper_tail(x: f64, theta: f64) -> f64 {
    0.5 * libm::erfc(x / (theta * core::f64::consts::SQRT_2))
}

/// Mass of `N(0, theta^2)` on `[k - 1/2, k + 1/2]`, floored at [`P_FLOOR`].
pub fn conditional_pmf(k: i64, theta: f64) -> f64 {
    // work on the upper half so both tails come from erfc without cancellation
    let a = (k.unsigned_abs() as f64) - 0.5;
    let b = a + 1.0;
    let p = if a < 0.0 { 1.0 - 2.0 * upper_tail(b, theta) } else { upper_tail(a, theta) - upper_tail(b, theta) };
    p.max(P_FLOOR)
}

/// Probability that `|value|` falls outside `[-(K + 1/2), K + 1/2]`.
pub fn tail_mass(support: i64, theta: f64) -> f64 {
    2.0 * upper_tail(support as f64 + 0.5, theta)
}

/// Modeled support radius `K = ceil(8 theta)`, capped to keep tables finite.
pub fn support_radius(theta: f64) -> i64 {
    (libm::ceil(8.0 * theta) as i64).clamp(1, 1 << 16)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub feature_bits: u64,
    pub side_info_bits: u64,
    pub mask_bits: u64,
    pub mask_included: bool,
    /// `B_y + B_s`, plus `B_P` when the mask is counted.
    pub total_bits: u64,
    /// Model information content of the coded features.
    pub ideal_feature_bits: f64,
}

/// Codes features and mask to measure their lengths. `side_info_bits` is the
/// size of the already coded scale side information.
pub fn measure_rate(
    q: &QuantizedTensor,
    theta: &ScaleField,
    set: &FilterSet,
    side_info_bits: u64,
    include_mask: bool,
) -> Result<RateReport> {
    let mut model = FeatureModel::new();
    let stream = encode_features(q, theta, set, &mut model)?;
    let ideal = ideal_feature_bits(q, theta, set, &mut model)?;
    let mask_bits = encode_mask(set)?.bit_count as u64;
    let feature_bits = stream.bit_count();
    let total_bits = feature_bits + side_info_bits + if include_mask { mask_bits } else { 0 };
    Ok(RateReport {
        feature_bits,
        side_info_bits,
        mask_bits,
        mask_included: include_mask,
        total_bits,
        ideal_feature_bits: ideal,
    })
}
