//! Per-image quantities shared by the metric, the codec and the optimizer.

use alloc::vec::Vec;

use crate::codec::{HyperScale, DEFAULT_GRID_STEP};
use crate::error::{invalid, Result};
use crate::filter::{saliency_excluding, select_importance, ClassModel, ImportanceMatrix};
use crate::tensor::{FeatureTensor, ImageTensor, ScaleField};
use crate::transform::{extract_features, ExtractorConfig, Padding};

#[derive(Debug, Clone, Copy)]
pub enum ImportanceSource<'a> {
    /// Energy of the non-constant coefficients at each position.
    Saliency,
    /// Class activation of the most probable class.
    ClassModel(&'a ClassModel),
    /// Precomputed importance on the feature grid.
    Given(&'a ImportanceMatrix),
}

pub fn importance_for(
    features: &FeatureTensor,
    cfg: &ExtractorConfig,
    src: &ImportanceSource<'_>,
) -> Result<ImportanceMatrix> {
    let d = features.dims();
    match src {
        ImportanceSource::Saliency => {
            let dc: Vec<usize> = (0..3).map(|c| cfg.dc_channel(c)).collect();
            saliency_excluding(features, &dc)
        }
        ImportanceSource::ClassModel(model) => Ok(select_importance(model, d.width, d.height)?.importance),
        ImportanceSource::Given(m) => {
            if (m.width(), m.height()) != (d.width, d.height) {
                return Err(invalid("importance grid differs from feature grid"));
            }
            Ok((*m).clone())
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImageAnalysis {
    pub features: FeatureTensor,
    pub padding: Padding,
    /// Reference-coder side information.
    pub hyper: HyperScale,
    /// Reference scale field, the expansion of `hyper`.
    pub theta_r: ScaleField,
    pub importance: ImportanceMatrix,
}

pub fn analyze_image(x: &ImageTensor, cfg: &ExtractorConfig, src: &ImportanceSource<'_>) -> Result<ImageAnalysis> {
    let (features, padding) = extract_features(x, cfg)?;
    let hyper = HyperScale::estimate(&features, cfg.scale_window, DEFAULT_GRID_STEP)?;
    let theta_r = hyper.expand(features.dims())?;
    let importance = importance_for(&features, cfg, src)?;
    Ok(ImageAnalysis { features, padding, hyper, theta_r, importance })
}
