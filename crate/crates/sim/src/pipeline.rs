//! Encoder and decoder built from the core stages.

use gvif_core::analysis::{analyze_image, ImageAnalysis, ImportanceSource};
use gvif_core::codec::{
    decode_features, encode_features, measure_rate, quantize, FeatureModel, HyperScale, RateReport, DEFAULT_GRID_STEP,
};
use gvif_core::filter::{build_filter_set, decode_mask, encode_mask, FilterSet, IndexSet};
use gvif_core::generate::surrogate_generate;
use gvif_core::gsm::{apply_coder_profile, CoderProfile};
use gvif_core::transform::reconstruct_image;
use gvif_core::{FeatureTensor, ImageTensor, QuantizedTensor, ScaleField};

use crate::config::SimConfig;
use crate::error::{format_err, Result, StageExt};
use crate::payload::Payload;

/// The shrink ratio exactly as the decoder will read it from the header.
pub fn stored_ratio(profile: &CoderProfile) -> f64 {
    profile.shrink_ratio as f32 as f64
}

fn coded_profile(profile: &CoderProfile) -> CoderProfile {
    CoderProfile { shrink_ratio: stored_ratio(profile), ..profile.clone() }
}

/// Encoder output together with the intermediate values the tests and the
/// reports look at.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub payload: Payload,
    pub analysis: ImageAnalysis,
    pub set: FilterSet,
    /// Scale field the features were coded under.
    pub theta_c: ScaleField,
    /// Quantized features `round(r y)` on the whole grid.
    pub quantized: QuantizedTensor,
    pub rate: RateReport,
}

pub fn encode_image(
    x: &ImageTensor,
    profile: &CoderProfile,
    alpha: f64,
    cfg: &SimConfig,
    importance: &ImportanceSource<'_>,
    prompt: &str,
) -> Result<Encoded> {
    let analysis = analyze_image(x, &cfg.extractor, importance).stage("extract")?;
    encode_analyzed(analysis, x.width(), x.height(), profile, alpha, cfg, prompt)
}

/// Same as [`encode_image`] for an image that has already been analyzed.
pub fn encode_analyzed(
    analysis: ImageAnalysis,
    width: usize,
    height: usize,
    profile: &CoderProfile,
    alpha: f64,
    cfg: &SimConfig,
    prompt: &str,
) -> Result<Encoded> {
    let coded = coded_profile(profile);
    let r = coded.shrink_ratio;
    let theta_c = apply_coder_profile(&analysis.theta_r, &coded).stage("profile")?;
    let d = analysis.features.dims();
    let set = build_filter_set(&analysis.importance, alpha, d.channels).stage("filter")?;
    let quantized = quantize(&analysis.features.map(|v| v * r)).stage("quantize")?;
    let side_info = analysis.hyper.encode(DEFAULT_GRID_STEP).stage("side-info")?;
    let mask = encode_mask(&set).stage("mask")?;
    let features = encode_features(&quantized, &theta_c, &set, &mut FeatureModel::new()).stage("entropy-encode")?;
    let rate = measure_rate(&quantized, &theta_c, &set, side_info.bit_count(), cfg.include_mask).stage("rate")?;
    let payload = Payload {
        include_mask: cfg.include_mask,
        basis: cfg.extractor.basis,
        block_size: cfg.extractor.block_size,
        scale_tile: analysis.hyper.tile,
        width,
        height,
        feature_dims: d,
        profile_id: profile.id,
        shrink_ratio: r as f32,
        alpha: alpha as f32,
        grid_step: DEFAULT_GRID_STEP as f32,
        prompt: prompt.to_string(),
        side_info,
        mask,
        features,
    };
    Ok(Encoded { payload, analysis, set, theta_c, quantized, rate })
}

#[derive(Debug, Clone)]
pub struct Decoded {
    /// Reconstruction from the received features only, zeros elsewhere.
    pub x_hat: ImageTensor,
    /// Reconstruction after completing the unselected features.
    pub x_tilde: ImageTensor,
    pub set: FilterSet,
    pub quantized: QuantizedTensor,
    pub theta_c: ScaleField,
    /// Completed features in the coded domain, before rescaling by `1/r`.
    pub completed: FeatureTensor,
}

pub fn decode_payload(payload: &Payload, seed: u64) -> Result<Decoded> {
    let cfg = payload.extractor();
    let step = payload.grid_step as f64;
    let hyper = HyperScale::decode(&payload.side_info, step, payload.scale_tile).stage("side-info")?;
    let theta_r = hyper.expand(payload.feature_dims).stage("side-info")?;
    let r = payload.shrink_ratio as f64;
    let profile =
        CoderProfile { id: payload.profile_id, shrink_ratio: r, nominal_psnr_db: 0.0, description: String::new() };
    let theta_c = apply_coder_profile(&theta_r, &profile).stage("profile")?;
    let set = decode_mask(&payload.mask, payload.feature_dims.channels).stage("mask")?;
    if set.dims() != payload.feature_dims {
        return Err(format_err("payload", "mask grid disagrees with feature dims"));
    }
    let quantized =
        decode_features(&payload.features, &theta_c, &set, &mut FeatureModel::new()).stage("entropy-decode")?;
    let padding = gvif_core::transform::Padding { width: payload.width, height: payload.height };
    let anchored = quantized.map(|k| k as f64 / r);
    let x_hat = reconstruct_image(&anchored, &cfg, padding).stage("reconstruct")?;
    let completed = surrogate_generate(&quantized, &set, &theta_c, seed).stage("generate")?;
    let x_tilde = reconstruct_image(&completed.map(|v| v / r), &cfg, padding).stage("reconstruct")?;
    Ok(Decoded { x_hat, x_tilde, set, quantized, theta_c, completed })
}
