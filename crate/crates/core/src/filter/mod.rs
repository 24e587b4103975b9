//! Class-activation importance, threshold filtering and mask coding.

mod rle;

pub use rle::{decode_mask, encode_mask, mask_runs, MaskBitstream};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::tensor::{Dims, FeatureTensor, Tensor3};

/// Dense 2-D matrix indexed `(i, j)` with `i` along the width.
#[derive(Debug, Clone, PartialEq)]
pub struct Map2 {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Map2 {
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch { dims: Dims::new(width, height, 1), len: data.len() });
        }
        Ok(Map2 { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for i in 0..width {
            for j in 0..height {
                data.push(f(i, j));
            }
        }
        Map2 { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.height + j]
    }
}

/// Importance values in `[0, 1]` over the feature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMatrix(Map2);

impl ImportanceMatrix {
    pub fn new(map: Map2) -> Result<Self> {
        if let Some(idx) = map.data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid(alloc::format!("importance outside [0, 1] at flat index {idx}")));
        }
        Ok(ImportanceMatrix(map))
    }

    pub fn map(&self) -> &Map2 {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0.data
    }

    pub fn max_value(&self) -> f64 {
        self.0.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Backbone feature maps with per-class weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    feature_maps: Tensor3<f64>,
    weights: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl ClassModel {
    pub fn new(feature_maps: Tensor3<f64>, weights: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyClassList);
        }
        if weights.len() != labels.len() {
            return Err(invalid("weight vector count differs from label count"));
        }
        let cf = feature_maps.dims().channels;
        if weights.iter().any(|w| w.len() != cf) {
            return Err(invalid("weight vector length differs from feature map count"));
        }
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(invalid("non-finite class weight"));
        }
        feature_maps.check_finite()?;
        Ok(ClassModel { feature_maps, weights, labels })
    }

    pub fn feature_maps(&self) -> &Tensor3<f64> {
        &self.feature_maps
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub label: String,
    pub score: f64,
    pub probability: f64,
}

/// Scores `S_k = sum_c w_c^k sum_ij f_ijc` and their softmax.
pub fn class_scores(model: &ClassModel) -> Vec<ClassScore> {
    let cf = model.feature_maps.dims().channels;
    let mut map_sums = vec![0.0; cf];
    for (idx, v) in model.feature_maps.as_slice().iter().enumerate() {
        map_sums[idx % cf] += v;
    }
    let scores: Vec<f64> = model.weights.iter().map(|w| w.iter().zip(&map_sums).map(|(a, b)| a * b).sum()).collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| libm::exp(s - top)).collect();
    let z: f64 = exps.iter().sum();
    scores
        .iter()
        .zip(exps)
        .zip(&model.labels)
        .map(|((&score, e), label)| ClassScore { label: label.clone(), score, probability: e / z })
        .collect()
}

/// Raw weighted sum `I^k = sum_c w_c^k f_c` at the feature-map resolution.
pub fn class_importance(model: &ClassModel, k: usize) -> Result<Map2> {
    let count = model.class_count();
    let w = model.weights.get(k).ok_or(Error::ClassIndexOutOfRange { index: k, count })?;
    let d = model.feature_maps.dims();
    Ok(Map2::from_fn(d.width, d.height, |i, j| {
        w.iter().enumerate().map(|(c, wc)| wc * model.feature_maps.get(i, j, c)).sum()
    }))
}

/// Min-max normalization to `[0, 1]`; a constant map becomes all 0.5.
pub fn normalize(raw: &Map2) -> Result<Map2> {
    if raw.data.iter().any(|v| !v.is_finite()) {
        return Err(invalid("importance map has non-finite values"));
    }
    let lo = raw.data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let data = if span > 0.0 {
        raw.data.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.5; raw.data.len()]
    };
    Ok(Map2 { width: raw.width, height: raw.height, data })
}

/// Bilinear resampling with pixel centers at half-integer positions and
/// edge-clamped borders.
pub fn bilinear_resize(src: &Map2, width: usize, height: usize) -> Result<Map2> {
    if src.width == 0 || src.height == 0 {
        return Err(invalid("cannot resample an empty map"));
    }
    let axis = |dst: usize, n_src: usize, n_dst: usize| -> (usize, usize, f64) {
        let s = (dst as f64 + 0.5) * n_src as f64 / n_dst as f64 - 0.5;
        let s = s.clamp(0.0, (n_src - 1) as f64);
        let i0 = libm::floor(s) as usize;
        let i1 = (i0 + 1).min(n_src - 1);
        (i0, i1, s - i0 as f64)
    };
    Ok(Map2::from_fn(width, height, |i, j| {
        let (i0, i1, fx) = axis(i, src.width, width);
        let (j0, j1, fy) = axis(j, src.height, height);
        (1.0 - fx) * ((1.0 - fy) * src.get(i0, j0) + fy * src.get(i0, j1))
            + fx * ((1.0 - fy) * src.get(i1, j0) + fy * src.get(i1, j1))
    }))
}

pub fn normalize_upsample(raw: &Map2, width: usize, height: usize) -> Result<ImportanceMatrix> {
    let up = bilinear_resize(&normalize(raw)?, width, height)?;
    // convex combinations stay in range; clamp only guards rounding
    let data = up.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    ImportanceMatrix::new(Map2 { data, ..up })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedImportance {
    pub importance: ImportanceMatrix,
    pub class_index: usize,
    pub label: String,
}

/// Importance of the most probable class; ties go to the lowest index.
pub fn select_importance(model: &ClassModel, width: usize, height: usize) -> Result<SelectedImportance> {
    let scores = class_scores(model);
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if s.probability > scores[best].probability {
            best = k;
        }
    }
    let raw = class_importance(model, best)?;
    Ok(SelectedImportance {
        importance: normalize_upsample(&raw, width, height)?,
        class_index: best,
        label: scores[best].label.clone(),
    })
}

/// Per-position energy `sum_c y_ijc^2`, min-max normalized.
pub fn saliency_surrogate(features: &FeatureTensor) -> Result<ImportanceMatrix> {
    saliency_excluding(features, &[])
}

/// Like [`saliency_surrogate`] but ignoring the listed channels, e.g. the
/// block means, which otherwise dominate the energy of natural images.
pub fn saliency_excluding(features: &FeatureTensor, skip: &[usize]) -> Result<ImportanceMatrix> {
    let d = features.dims();
    let energy = Map2::from_fn(d.width, d.height, |i, j| {
        (0..d.channels)
            .filter(|c| !skip.contains(c))
            .map(|c| {
                let v = features.get(i, j, c);
                v * v
            })
            .sum()
    });
    ImportanceMatrix::new(normalize(&energy)?)
}

/// Membership test over flat `(i, j, c)` indices.
pub trait IndexSet {
    fn dims(&self) -> Dims;
    fn contains_flat(&self, index: usize) -> bool;

    fn count(&self) -> usize {
        (0..self.dims().len()).filter(|&k| self.contains_flat(k)).count()
    }
}

/// Channel-complete selection `P = {(i, j, c) : mask(i, j)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterSet {
    width: usize,
    height: usize,
    channels: usize,
    mask: Vec<bool>,
}

impl FilterSet {
    pub fn from_mask(width: usize, height: usize, channels: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::LengthMismatch { dims: Dims::new(width, height, 1), len: mask.len() });
        }
        if channels == 0 {
            return Err(invalid("filter set needs at least one channel"));
        }
        Ok(FilterSet { width, height, channels, mask })
    }

    pub fn full(dims: Dims) -> Self {
        FilterSet {
            width: dims.width,
            height: dims.height,
            channels: dims.channels,
            mask: vec![true; dims.positions()],
        }
    }

    pub fn empty(dims: Dims) -> Self {
        FilterSet {
            width: dims.width,
            height: dims.height,
            channels: dims.channels,
            mask: vec![false; dims.positions()],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn contains_position(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.height + j]
    }

    pub fn selected_positions(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// `|P| = C_y * selected positions`.
    pub fn len(&self) -> usize {
        self.channels * self.selected_positions()
    }

    pub fn is_empty(&self) -> bool {
        self.selected_positions() == 0
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|m| *m)
    }

    pub fn is_subset_of(&self, other: &FilterSet) -> bool {
        self.mask.len() == other.mask.len() && self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }
}

impl IndexSet for FilterSet {
    fn dims(&self) -> Dims {
        Dims::new(self.width, self.height, self.channels)
    }

    #[inline]
    fn contains_flat(&self, index: usize) -> bool {
        self.mask[index / self.channels]
    }

    fn count(&self) -> usize {
        self.len()
    }
}

/// Arbitrary element-level selection, not necessarily channel-complete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSet {
    dims: Dims,
    members: Vec<bool>,
}

impl ElementSet {
    pub fn new(dims: Dims, members: Vec<bool>) -> Result<Self> {
        if members.len() != dims.len() {
            return Err(Error::LengthMismatch { dims, len: members.len() });
        }
        Ok(ElementSet { dims, members })
    }
}

impl IndexSet for ElementSet {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn contains_flat(&self, index: usize) -> bool {
        self.members[index]
    }
}

/// Positions with `I_ij >= alpha`, expanded across all channels.
pub fn build_filter_set(importance: &ImportanceMatrix, alpha: f64, channels: usize) -> Result<FilterSet> {
    if alpha.is_nan() {
        return Err(invalid("threshold is NaN"));
    }
    let mask = importance.as_slice().iter().map(|v| *v >= alpha).collect();
    FilterSet::from_mask(importance.width(), importance.height(), channels, mask)
}

/// Zeroes every element outside the set.
pub fn apply_filter(features: &FeatureTensor, set: &FilterSet) -> Result<FeatureTensor> {
    set.dims().expect(features.dims())?;
    let mut out = features.clone();
    for (idx, v) in out.as_mut_slice().iter_mut().enumerate() {
        if !set.contains_flat(idx) {
            *v = 0.0;
        }
    }
    Ok(out)
}
