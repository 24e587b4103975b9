//! SNR sweeps with the profile/threshold optimizer in the loop.

use gvif_core::channel::{bit_budget, capacity, ChannelState};
use gvif_core::gsm::CoderProfile;
use gvif_core::metric::{mask_psnr, PixelMask};
use gvif_core::optimizer::{expected_values, select_profile, OptimizerConfig, Selection};
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::dataset::Dataset;
use crate::error::{Result, StageExt};
use crate::oracle::DatasetOracle;
use crate::pipeline::{decode_payload, encode_analyzed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Threshold chosen by the optimizer.
    Adaptive,
    /// Everything transmitted, `alpha = 0`; only the profile adapts.
    NoFilter,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Adaptive => "adaptive",
            Scheme::NoFilter => "no_filter",
        }
    }

    fn optimizer(self, base: &OptimizerConfig) -> OptimizerConfig {
        match self {
            Scheme::Adaptive => base.clone(),
            Scheme::NoFilter => OptimizerConfig { alpha_th: 0.0, alpha0: 0.0, ..base.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub profile_id: Option<u16>,
    pub alpha: f64,
    pub mean_gvif: f64,
    /// Mean size of the actually coded payloads.
    pub mean_bits: f64,
    pub latency_s: f64,
    /// Mean over images whose selected set is nonempty; NaN if there is none.
    pub mean_mask_psnr_db: f64,
    /// Mean coded size within the latency budget.
    pub feasible: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(scheme: Scheme, snr_db: f64, error: String) -> Self {
        SweepRow {
            scheme,
            snr_db,
            profile_id: None,
            alpha: f64::NAN,
            mean_gvif: f64::NAN,
            mean_bits: f64::NAN,
            latency_s: f64::NAN,
            mean_mask_psnr_db: f64::NAN,
            feasible: false,
            error: Some(error),
        }
    }
}

/// Per-image results of coding the whole dataset with one choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mean_gvif: f64,
    pub mean_bits: f64,
    pub mean_mask_psnr_db: f64,
    pub bits: Vec<u64>,
    pub mask_psnr_db: Vec<Option<f64>>,
}

/// Codes and decodes every scene with `(profile, alpha)`.
pub fn evaluate_choice(
    dataset: &Dataset,
    oracle: &DatasetOracle,
    profile: &CoderProfile,
    alpha: f64,
    cfg: &SimConfig,
) -> Result<Evaluation> {
    let (mean_gvif, _) = expected_values(oracle, profile, alpha).stage("gvif")?;
    let per_image: Vec<(u64, Option<f64>)> = dataset
        .scenes
        .par_iter()
        .enumerate()
        .map(|(k, scene)| -> Result<(u64, Option<f64>)> {
            let (w, h) = (scene.image.width(), scene.image.height());
            let enc = encode_analyzed(oracle.analysis(k).clone(), w, h, profile, alpha, cfg, "")?;
            let psnr = if enc.set.is_empty() {
                None
            } else {
                let dec = decode_payload(&enc.payload, cfg.seed)?;
                let mask = PixelMask::from_filter_set(&dec.set, cfg.extractor.block_size, w, h).stage("mask")?;
                Some(mask_psnr(&scene.image, &dec.x_hat, &mask).stage("mask-psnr")?)
            };
            Ok((enc.payload.rate_bits(), psnr))
        })
        .collect::<Result<_>>()?;
    let n = per_image.len() as f64;
    let mean_bits = per_image.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let psnrs: Vec<f64> = per_image.iter().filter_map(|p| p.1).collect();
    let mean_mask_psnr_db = if psnrs.is_empty() { f64::NAN } else { psnrs.iter().sum::<f64>() / psnrs.len() as f64 };
    Ok(Evaluation {
        mean_gvif,
        mean_bits,
        mean_mask_psnr_db,
        bits: per_image.iter().map(|p| p.0).collect(),
        mask_psnr_db: per_image.iter().map(|p| p.1).collect(),
    })
}

fn cell_seed(seed: u64, snr_index: usize) -> u64 {
    seed ^ (snr_index as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Runs profile selection for one channel state and codes the dataset
/// with the chosen profile and threshold.
pub fn run_cell(
    dataset: &Dataset,
    oracle: &DatasetOracle,
    candidates: &[CoderProfile],
    scheme: Scheme,
    snr_db: f64,
    snr_index: usize,
    cfg: &SimConfig,
) -> Result<(SweepRow, Selection)> {
    let ch = ChannelState::from_db(snr_db, cfg.bandwidth_hz)?;
    let opt = OptimizerConfig { seed: cell_seed(cfg.seed, snr_index), ..scheme.optimizer(&cfg.optimizer) };
    let selection = select_profile(candidates, oracle, &ch, &opt).stage("optimize")?;
    let chosen = &selection.chosen;
    let eval = evaluate_choice(dataset, oracle, &chosen.profile, chosen.alpha_star, cfg)?;
    let c = capacity(&ch);
    let latency_s = if c > 0.0 { eval.mean_bits / c } else { f64::INFINITY };
    let budget = bit_budget(&ch, opt.t_max)?;
    let row = SweepRow {
        scheme,
        snr_db,
        profile_id: Some(chosen.profile.id),
        alpha: chosen.alpha_star,
        mean_gvif: eval.mean_gvif,
        mean_bits: eval.mean_bits,
        latency_s,
        mean_mask_psnr_db: eval.mean_mask_psnr_db,
        feasible: eval.mean_bits <= budget,
        error: None,
    };
    Ok((row, selection))
}

/// One row per `(scheme, snr)`; a failing cell becomes a row carrying the
/// error and the sweep goes on.
pub fn run_snr_sweep(
    dataset: &Dataset,
    oracle: &DatasetOracle,
    candidates: &[CoderProfile],
    snr_grid_db: &[f64],
    schemes: &[Scheme],
    cfg: &SimConfig,
) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(snr_grid_db.len() * schemes.len());
    for &scheme in schemes {
        for (k, &snr) in snr_grid_db.iter().enumerate() {
            rows.push(match run_cell(dataset, oracle, candidates, scheme, snr, k, cfg) {
                Ok((row, _)) => row,
                Err(e) => SweepRow::failed(scheme, snr, e.to_string()),
            });
        }
    }
    rows
}
