//! Correlation between completed and encoder features, inside and outside
//! the transmitted set.

use gvif_core::analysis::analyze_image;
use gvif_core::codec::quantize;
use gvif_core::filter::{build_filter_set, FilterSet, ImportanceMatrix, IndexSet, Map2};
use gvif_core::generate::surrogate_generate;
use gvif_core::gsm::{apply_coder_profile, CoderProfile};
use gvif_core::Error;
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::dataset::Dataset;
use crate::error::{Result, StageExt};
use crate::pipeline::stored_ratio;

/// Streaming Pearson coefficient (centered co-moments, mergeable).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pearson {
    n: u64,
    mx: f64,
    my: f64,
    m2x: f64,
    m2y: f64,
    cxy: f64,
}

impl Pearson {
    pub fn push(&mut self, x: f64, y: f64) {
        self.merge(&Pearson { n: 1, mx: x, my: y, ..Pearson::default() });
    }

    pub fn merge(&mut self, o: &Pearson) {
        if o.n == 0 {
            return;
        }
        let n = self.n + o.n;
        let (na, nb) = (self.n as f64, o.n as f64);
        let f = na * nb / n as f64;
        let (dx, dy) = (o.mx - self.mx, o.my - self.my);
        self.m2x += o.m2x + dx * dx * f;
        self.m2y += o.m2y + dy * dy * f;
        self.cxy += o.cxy + dx * dy * f;
        self.mx += dx * nb / n as f64;
        self.my += dy * nb / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// NaN when either variable is constant or there are no samples.
    pub fn value(&self) -> f64 {
        if self.n == 0 || self.m2x <= 0.0 || self.m2y <= 0.0 {
            return f64::NAN;
        }
        (self.cxy / (self.m2x * self.m2y).sqrt()).clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    /// Correlation at each feature-grid position, pooled over channels,
    /// images and draws.
    pub per_position: Map2,
    pub inside: Option<Pearson>,
    pub outside: Option<Pearson>,
    /// Images times draws.
    pub samples: usize,
}

/// Positions whose importance, averaged over the dataset, reaches `alpha`.
pub fn dataset_mask(dataset: &Dataset, alpha: f64, cfg: &SimConfig) -> Result<FilterSet> {
    let analyses = dataset
        .scenes
        .par_iter()
        .map(|s| analyze_image(&s.image, &cfg.extractor, &s.importance_source()).stage("extract"))
        .collect::<Result<Vec<_>>>()?;
    let first = analyses.first().ok_or(Error::EmptyDataset)?;
    let d = first.features.dims();
    if analyses.iter().any(|a| a.features.dims() != d) {
        return Err(Error::InvalidArgument("images differ in size".into())).stage("mask");
    }
    let n = analyses.len() as f64;
    let mean =
        Map2::from_fn(d.width, d.height, |i, j| analyses.iter().map(|a| a.importance.get(i, j)).sum::<f64>() / n);
    let importance = ImportanceMatrix::new(mean)?;
    Ok(build_filter_set(&importance, alpha, d.channels)?)
}

/// Pairs each element of the encoder's quantized features with the same
/// element after completion, for `draws` completions of every image.
pub fn validate_generation_independence(
    dataset: &Dataset,
    mask: &FilterSet,
    draws: usize,
    profile: &CoderProfile,
    cfg: &SimConfig,
) -> Result<CorrelationReport> {
    let samples = dataset.len() * draws;
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {samples}")).into());
    }
    let d = mask.dims();
    let coded = CoderProfile { shrink_ratio: stored_ratio(profile), ..profile.clone() };
    let per_image = dataset
        .scenes
        .par_iter()
        .enumerate()
        .map(|(k, s)| -> Result<Vec<Pearson>> {
            let a = analyze_image(&s.image, &cfg.extractor, &s.importance_source()).stage("extract")?;
            if a.features.dims() != d {
                return Err(Error::DimensionMismatch { expected: d, found: a.features.dims() }).stage("mask");
            }
            let theta_c = apply_coder_profile(&a.theta_r, &coded).stage("profile")?;
            let q = quantize(&a.features.map(|v| v * coded.shrink_ratio)).stage("quantize")?;
            let mut acc = vec![Pearson::default(); d.positions()];
            for draw in 0..draws {
                let seed = cfg.seed ^ ((k * draws + draw) as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let g = surrogate_generate(&q, mask, &theta_c, seed).stage("generate")?;
                for (idx, (&t, &v)) in q.as_slice().iter().zip(g.as_slice()).enumerate() {
                    acc[idx / d.channels].push(t as f64, v);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut positions = vec![Pearson::default(); d.positions()];
    for acc in &per_image {
        for (p, a) in positions.iter_mut().zip(acc) {
            p.merge(a);
        }
    }
    let (mut inside, mut outside) = (None::<Pearson>, None::<Pearson>);
    for (pos, p) in positions.iter().enumerate() {
        let slot = if mask.mask()[pos] { &mut inside } else { &mut outside };
        slot.get_or_insert_with(Pearson::default).merge(p);
    }
    let per_position = Map2::from_fn(d.width, d.height, |i, j| positions[i * d.height + j].value());
    Ok(CorrelationReport { per_position, inside, outside, samples })
}
