//! Dataset-backed GVIF and rate oracle.
//!
//! The selected set only grows as the threshold drops, so for each image
//! and profile the positions are ordered by importance once and the GVIF
//! numerator and the feature code length are kept as prefix sums. A query
//! is then a binary search on the threshold.

use std::collections::HashMap;

use gvif_core::analysis::{analyze_image, ImageAnalysis};
use gvif_core::codec::{quantize, FeatureModel, DEFAULT_GRID_STEP};
use gvif_core::filter::{build_filter_set, encode_mask, FilterSet};
use gvif_core::gsm::{apply_coder_profile, CoderProfile};
use gvif_core::metric::{channel_bits, reference_information, HvsParams};
use gvif_core::optimizer::EvalOracle;
use gvif_core::{Error, ScalingField};
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::dataset::Dataset;
use crate::error::{Result, StageExt};
use crate::pipeline::stored_ratio;

/// Upper bound on what the range coder adds to the model code length of
/// one stream (its flush), so oracle rates never undercount coded ones.
pub const STREAM_OVERHEAD_BITS: f64 = 32.0;

struct Curve {
    numerator: Vec<f64>,
    bits: Vec<f64>,
}

struct Item {
    analysis: ImageAnalysis,
    /// Importance of each position, sorted in descending order.
    importance: Vec<f64>,
    denominator: f64,
    side_bits: f64,
    curves: Vec<Curve>,
}

pub struct DatasetOracle {
    items: Vec<Item>,
    profile_index: HashMap<u16, usize>,
    include_mask: bool,
}

fn curve(a: &ImageAnalysis, order: &[usize], profile: &CoderProfile, hvs: &HvsParams) -> gvif_core::Result<Curve> {
    let r = stored_ratio(profile);
    let coded = CoderProfile { shrink_ratio: r, ..profile.clone() };
    let theta_c = apply_coder_profile(&a.theta_r, &coded)?;
    let beta = ScalingField::from_ratio(&theta_c, &a.theta_r)?;
    let q = quantize(&a.features.map(|v| v * r))?;
    let c = a.features.dims().channels;
    let mut model = FeatureModel::new();
    let mut numerator = vec![0.0; order.len() + 1];
    let mut bits = vec![0.0; order.len() + 1];
    for (k, &pos) in order.iter().enumerate() {
        let (mut n, mut b) = (0.0, 0.0);
        for idx in pos * c..(pos + 1) * c {
            let t = a.theta_r.as_slice()[idx];
            n += channel_bits(beta.as_slice()[idx] * t, hvs.gamma2());
            b += model.symbol_bits(q.as_slice()[idx], theta_c.as_slice()[idx]);
        }
        numerator[k + 1] = numerator[k] + n;
        bits[k + 1] = bits[k] + b;
    }
    Ok(Curve { numerator, bits })
}

impl DatasetOracle {
    /// Analyzes every scene and tabulates the curves of `profiles`.
    pub fn new(dataset: &Dataset, profiles: &[CoderProfile], cfg: &SimConfig) -> Result<Self> {
        let hvs = cfg.hvs()?;
        let profile_index = profiles.iter().enumerate().map(|(k, p)| (p.id, k)).collect();
        let items = dataset
            .scenes
            .par_iter()
            .map(|scene| -> Result<Item> {
                let analysis =
                    analyze_image(&scene.image, &cfg.extractor, &scene.importance_source()).stage("extract")?;
                let imp = analysis.importance.as_slice();
                let mut order: Vec<usize> = (0..imp.len()).collect();
                order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]).then(a.cmp(&b)));
                let importance = order.iter().map(|&p| imp[p]).collect();
                let denominator = reference_information(&analysis.theta_r, &hvs);
                if !denominator.is_normal() {
                    return Err(Error::Degenerate("reference information is zero")).stage("gvif");
                }
                let side_bits = analysis.hyper.encode(DEFAULT_GRID_STEP).stage("side-info")?.bit_count() as f64;
                let curves = profiles
                    .iter()
                    .map(|p| curve(&analysis, &order, p, &hvs))
                    .collect::<gvif_core::Result<_>>()
                    .stage("oracle")?;
                Ok(Item { analysis, importance, denominator, side_bits, curves })
            })
            .collect::<Result<_>>()?;
        Ok(DatasetOracle { items, profile_index, include_mask: cfg.include_mask })
    }

    pub fn analysis(&self, item: usize) -> &ImageAnalysis {
        &self.items[item].analysis
    }

    /// Number of positions with importance `>= alpha`.
    pub fn selected_positions(&self, alpha: f64, item: usize) -> usize {
        self.items[item].importance.partition_point(|&v| v >= alpha)
    }

    pub fn filter_set(&self, alpha: f64, item: usize) -> gvif_core::Result<FilterSet> {
        let a = &self.items[item].analysis;
        build_filter_set(&a.importance, alpha, a.features.dims().channels)
    }

    fn lookup(&self, profile: &CoderProfile, alpha: f64, item: usize) -> gvif_core::Result<(&Item, &Curve, usize)> {
        if alpha.is_nan() {
            return Err(Error::Oracle("threshold is NaN".into()));
        }
        let it = self.items.get(item).ok_or_else(|| Error::Oracle(format!("no item {item}")))?;
        let &k = self
            .profile_index
            .get(&profile.id)
            .ok_or_else(|| Error::Oracle(format!("profile {} was not tabulated", profile.id)))?;
        Ok((it, &it.curves[k], it.importance.partition_point(|&v| v >= alpha)))
    }
}

impl EvalOracle for DatasetOracle {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn gvif(&self, profile: &CoderProfile, alpha: f64, item: usize) -> gvif_core::Result<f64> {
        let (it, c, n) = self.lookup(profile, alpha, item)?;
        Ok(c.numerator[n] / it.denominator)
    }

    /// Side information, model code length of the selected features plus
    /// the coder overhead allowance, and the mask when it is counted.
    fn bits(&self, profile: &CoderProfile, alpha: f64, item: usize) -> gvif_core::Result<f64> {
        let (it, c, n) = self.lookup(profile, alpha, item)?;
        let features = if n == 0 { 0.0 } else { c.bits[n] + STREAM_OVERHEAD_BITS };
        let mask = if self.include_mask { encode_mask(&self.filter_set(alpha, item)?)?.bit_count as f64 } else { 0.0 };
        Ok(it.side_bits + features + mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthetic_dataset, SyntheticSpec};
    use crate::pipeline::encode_analyzed;
    use gvif_core::gsm::ProfileTable;
    use gvif_core::metric::gvif;

    #[test]
    fn matches_direct_evaluation() {
        let cfg = SimConfig::default();
        let data =
            synthetic_dataset(&SyntheticSpec { count: 3, width: 64, height: 64, seed: 5 }, &cfg.extractor).unwrap();
        let table = ProfileTable::default_table();
        let profiles: Vec<CoderProfile> = table.profiles().iter().step_by(6).cloned().collect();
        let oracle = DatasetOracle::new(&data, &profiles, &cfg).unwrap();
        let hvs = cfg.hvs().unwrap();
        for p in &profiles {
            for alpha in [0.0, 0.25, 0.6, 1.01] {
                for item in 0..data.len() {
                    let a = oracle.analysis(item).clone();
                    let set = oracle.filter_set(alpha, item).unwrap();
                    let theta_c =
                        apply_coder_profile(&a.theta_r, &CoderProfile { shrink_ratio: stored_ratio(p), ..p.clone() })
                            .unwrap();
                    let beta = ScalingField::from_ratio(&theta_c, &a.theta_r).unwrap();
                    let direct = gvif(&a.theta_r, &beta, &set, &hvs).unwrap().value;
                    let v = oracle.gvif(p, alpha, item).unwrap();
                    assert!((v - direct).abs() <= 1e-12 * direct.max(1.0), "{v} {direct}");

                    let enc = encode_analyzed(a, 64, 64, p, alpha, &cfg, "").unwrap();
                    let b = oracle.bits(p, alpha, item).unwrap();
                    let ideal = enc.rate.side_info_bits as f64
                        + enc.rate.ideal_feature_bits
                        + if set.is_empty() { 0.0 } else { STREAM_OVERHEAD_BITS };
                    assert!((b - ideal).abs() < 1e-6 * b, "{b} {ideal}");
                    assert!(enc.rate.total_bits as f64 <= b);
                }
            }
        }
    }

    #[test]
    fn unknown_profile_is_an_error() {
        let cfg = SimConfig::default();
        let data =
            synthetic_dataset(&SyntheticSpec { count: 1, width: 32, height: 32, seed: 0 }, &cfg.extractor).unwrap();
        let table = ProfileTable::default_table();
        let oracle = DatasetOracle::new(&data, &table.profiles()[..1], &cfg).unwrap();
        assert!(oracle.gvif(&table.profiles()[1], 0.5, 0).is_err());
        assert!(oracle.bits(&table.profiles()[0], 0.5, 3).is_err());
    }
}
