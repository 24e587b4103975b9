//! Measures the nominal PSNR of each built-in coder profile on the seeded
//! synthetic scenes (full transmission, anchored reconstruction) and prints
//! rows for the `DEFAULT_PROFILES` table.
//!
//! cargo run --release -p gvif-sim --example calibrate_profiles

use gvif_core::gsm::{CoderProfile, ProfileTable};
use gvif_core::metric::{mask_psnr, PixelMask};
use gvif_sim::dataset::{synthetic_dataset, SyntheticSpec};
use gvif_sim::pipeline::{decode_payload, encode_image};
use gvif_sim::SimConfig;
use rayon::prelude::*;

fn main() -> anyhow::Result<()> {
    let cfg = SimConfig::default();
    let data = synthetic_dataset(&SyntheticSpec::default(), &cfg.extractor)?;
    for p in ProfileTable::default_table().profiles() {
        let probe = CoderProfile { nominal_psnr_db: 0.0, ..p.clone() };
        let psnr: Vec<f64> = data
            .scenes
            .par_iter()
            .map(|s| -> anyhow::Result<f64> {
                let enc = encode_image(&s.image, &probe, 0.0, &cfg, &s.importance_source(), "")?;
                let dec = decode_payload(&enc.payload, 0)?;
                let full = PixelMask::full(s.image.width(), s.image.height());
                Ok(mask_psnr(&s.image, &dec.x_hat, &full)?)
            })
            .collect::<anyhow::Result<_>>()?;
        let mean = psnr.iter().sum::<f64>() / psnr.len() as f64;
        println!("    ({}, {:?}, {:.2}),", p.id, p.shrink_ratio, mean);
    }
    Ok(())
}
