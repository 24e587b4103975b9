//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

use std::time::{Duration, Instant};

use gvif_core::channel::{bit_budget, capacity, latency, ChannelState};
use gvif_core::codec::{conditional_pmf, decode_features, encode_features, ideal_feature_bits, quantize, FeatureModel};
use gvif_core::filter::{decode_mask, encode_mask, ElementSet, FilterSet, IndexSet};
use gvif_core::gsm::{sample_gsm_features, CoderProfile, ProfileTable};
use gvif_core::metric::{gvif, HvsParams};
use gvif_core::optimizer::{
    estimate_gradient, expected_values, optimize_threshold, select_profile, EvalOracle, FnOracle, OptimizerConfig,
};
use gvif_core::{Dims, ScaleField, ScalingField, Tensor3};
use gvif_sim::appendix::{dataset_mask, validate_generation_independence};
use gvif_sim::dataset::{synthetic_dataset, SyntheticSpec};
use gvif_sim::oracle::DatasetOracle;
use gvif_sim::sweep::{run_snr_sweep, Scheme};
use gvif_sim::SimConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn random_dims(rng: &mut ChaCha8Rng, max_side: usize, max_channels: usize) -> Dims {
    Dims::new(rng.random_range(1..=max_side), rng.random_range(1..=max_side), rng.random_range(1..=max_channels))
}

/// Log-uniform scales in `[lo, hi]`.
fn random_theta(rng: &mut ChaCha8Rng, d: Dims, lo: f64, hi: f64) -> ScaleField {
    let (a, b) = (lo.ln(), hi.ln());
    ScaleField::new(Tensor3::from_fn(d, |_, _, _| rng.random_range(a..b).exp())).unwrap()
}

fn random_mask(rng: &mut ChaCha8Rng, positions: usize) -> Vec<bool> {
    let p: f64 = rng.random_range(0.0..1.0);
    (0..positions).map(|_| rng.random_bool(p)).collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let hvs = HvsParams::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = random_dims(&mut rng, 16, 8);
        let theta = random_theta(&mut rng, d, 0.01, 50.0);
        let full = FilterSet::full(d);
        let one = gvif(&theta, &ScalingField::constant(d, 1.0).unwrap(), &full, &hvs).map_err(|e| e.to_string())?;
        let empty = gvif(&theta, &ScalingField::constant(d, 1.0).unwrap(), &FilterSet::empty(d), &hvs)
            .map_err(|e| e.to_string())?;
        let zero = gvif(&theta, &ScalingField::constant(d, 0.0).unwrap(), &full, &hvs).map_err(|e| e.to_string())?;
        worst = worst.max((one.value - 1.0).abs()).max(empty.value.abs()).max(zero.value.abs());
    }
    check(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("50 instances, max deviation {worst:e}"))
}

/// Mutual information of `N(0, s^2)` observed in `N(0, g2)` noise, from the
/// output and noise variances.
fn gaussian_mi_bits(s: f64, g2: f64) -> f64 {
    ((s * s + g2).ln() - g2.ln()) / (2.0 * std::f64::consts::LN_2)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = random_dims(&mut rng, 64, 16);
        let theta = random_theta(&mut rng, d, 0.01, 30.0);
        let beta = ScalingField::from_values(Tensor3::from_fn(d, |_, _, _| rng.random_range(0.0..=1.0))).unwrap();
        let set = ElementSet::new(d, (0..d.len()).map(|_| rng.random_bool(0.6)).collect()).unwrap();
        let g2 = rng.random_range(0.01..2.0);
        let hvs = HvsParams::new(g2).unwrap();
        let v = gvif(&theta, &beta, &set, &hvs).map_err(|e| e.to_string())?.value;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..d.len() {
            let t = theta.as_slice()[k];
            den += gaussian_mi_bits(t, g2);
            if set.contains_flat(k) {
                num += gaussian_mi_bits(beta.as_slice()[k] * t, g2);
            }
        }
        worst = worst.max(rel(v, num / den));
    }
    check(worst <= 1e-9, || format!("max relative error {worst:e}"))?;
    Ok(format!("200 instances, max relative error {worst:e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_scale: f64 = 0.0;
    for n in 0..200 {
        let d = random_dims(&mut rng, 24, 8);
        let theta = random_theta(&mut rng, d, 0.01, 30.0);
        let g2 = rng.random_range(0.01..2.0);
        let hvs = HvsParams::new(g2).unwrap();
        let beta_lo: Vec<f64> = (0..d.len()).map(|_| rng.random_range(0.0..=1.0)).collect();
        let beta_hi: Vec<f64> = beta_lo.iter().map(|b| rng.random_range(*b..=1.0)).collect();
        let beta_lo = ScalingField::from_values(Tensor3::from_vec(d, beta_lo).unwrap()).unwrap();
        let beta_hi = ScalingField::from_values(Tensor3::from_vec(d, beta_hi).unwrap()).unwrap();
        let inner = random_mask(&mut rng, d.positions());
        let outer: Vec<bool> = inner.iter().map(|&b| b || rng.random_bool(0.3)).collect();
        let inner = FilterSet::from_mask(d.width, d.height, d.channels, inner).unwrap();
        let outer = FilterSet::from_mask(d.width, d.height, d.channels, outer).unwrap();
        let v = |b: &ScalingField, s: &FilterSet| gvif(&theta, b, s, &hvs).unwrap().value;
        let base = v(&beta_lo, &inner);
        check(v(&beta_lo, &outer) >= base, || format!("instance {n}: enlarging the set lowered GVIF"))?;
        check(v(&beta_hi, &inner) >= base, || format!("instance {n}: raising the scaling lowered GVIF"))?;
        let k: f64 = rng.random_range(0.1..10.0);
        let scaled = ScaleField::new(theta.tensor().map(|t| t * k)).unwrap();
        let hvs_k = HvsParams::new(g2 * k * k).unwrap();
        let vk = gvif(&scaled, &beta_lo, &inner, &hvs_k).unwrap().value;
        worst_scale = worst_scale.max(rel(base, vk));
    }
    check(worst_scale <= 1e-12, || format!("joint scaling changed GVIF by {worst_scale:e}"))?;
    Ok(format!("200 instances, joint scaling max relative change {worst_scale:e}"))
}

/// Mass of `N(0, sigma^2)` on `[a, b]` by composite Simpson quadrature of the
/// density, independent of the erfc path used by the codec.
fn normal_mass(a: f64, b: f64, sigma: f64) -> f64 {
    let n = 20_000;
    let h = (b - a) / n as f64;
    let pdf = |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut s = pdf(a) + pdf(b);
    for k in 1..n {
        s += pdf(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn criterion_4() -> Outcome {
    let pmf_1 = conditional_pmf(0, 1.0);
    let pmf_half = conditional_pmf(0, 0.5);
    let oracle_1 = normal_mass(-0.5, 0.5, 1.0);
    let oracle_half = normal_mass(-0.5, 0.5, 0.5);
    check((pmf_1 - 0.38292).abs() <= 1e-5 && (pmf_1 - oracle_1).abs() <= 1e-9, || {
        format!("P(0 | 1) = {pmf_1}, quadrature {oracle_1}")
    })?;
    check((pmf_half - 0.68269).abs() <= 1e-5 && (pmf_half - oracle_half).abs() <= 1e-9, || {
        format!("P(0 | 0.5) = {pmf_half}, quadrature {oracle_half}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_overhead = f64::NEG_INFINITY;
    for n in 0..100 {
        let d = random_dims(&mut rng, 32, 16);
        let theta = random_theta(&mut rng, d, 0.02, 40.0);
        let q = quantize(&sample_gsm_features(&theta, rng.random())).unwrap();
        let set = FilterSet::from_mask(d.width, d.height, d.channels, random_mask(&mut rng, d.positions())).unwrap();
        let stream = encode_features(&q, &theta, &set, &mut FeatureModel::new()).map_err(|e| e.to_string())?;
        let back = decode_features(&stream, &theta, &set, &mut FeatureModel::new()).map_err(|e| e.to_string())?;
        let kept: Vec<i32> =
            q.as_slice().iter().enumerate().map(|(k, &v)| if set.contains_flat(k) { v } else { 0 }).collect();
        check(back.as_slice() == kept.as_slice(), || format!("tensor {n}: roundtrip mismatch"))?;
        let ideal = ideal_feature_bits(&q, &theta, &set, &mut FeatureModel::new()).unwrap();
        let overhead = stream.bit_count() as f64 - ideal;
        check(overhead <= 32.0, || format!("tensor {n}: {} bits vs ideal {ideal}", stream.bit_count()))?;
        max_overhead = max_overhead.max(overhead);
    }
    Ok(format!("P(0|1)={pmf_1:.6}, P(0|0.5)={pmf_half:.6}; 100 tensors lossless, max overhead {max_overhead:.2} bits"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut compared = 0;
    let mut worst_ratio: f64 = 0.0;
    for n in 0..1000 {
        let (w, h) = (rng.random_range(1..=256), rng.random_range(1..=256));
        let positions = w * h;
        let density: f64 = if n % 2 == 0 { rng.random_range(0.0..=0.25) } else { rng.random_range(0.0..=1.0) };
        let mut mask = Vec::with_capacity(positions);
        let mut bit = rng.random_bool(0.5);
        for _ in 0..positions {
            mask.push(bit);
            if rng.random_bool(density) {
                bit = !bit;
            }
        }
        let transitions = mask.windows(2).filter(|p| p[0] != p[1]).count();
        let set = FilterSet::from_mask(w, h, 3, mask).unwrap();
        let stream = encode_mask(&set).map_err(|e| e.to_string())?;
        let back = decode_mask(&stream, 3).map_err(|e| e.to_string())?;
        check(back == set, || format!("mask {n} ({w}x{h}): roundtrip mismatch"))?;
        // both layouts carry the same 32-bit dimension header
        let observed = transitions as f64 / (positions.max(2) - 1) as f64;
        if positions >= 1024 && observed <= 0.25 {
            compared += 1;
            let body = stream.bit_count - 32;
            worst_ratio = worst_ratio.max(body as f64 / positions as f64);
            check(body < positions, || format!("mask {n} ({w}x{h}, density {observed:.3}): {body} bits"))?;
        }
    }
    Ok(format!(
        "1000 roundtrips exact; {compared} masks with >= 1024 positions and density <= 0.25, worst size {:.3} of raw",
        worst_ratio
    ))
}

fn criterion_6() -> Outcome {
    let o = FnOracle::new(1, |_, a, _| a * a, |_, _, _| 0.0);
    let p = CoderProfile { id: 1, shrink_ratio: 0.5, nominal_psnr_db: 40.0, description: String::new() };
    let cfg = OptimizerConfig { smoothing: 1e-4, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 100_000;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += estimate_gradient(1.0, &[0], &p, &o, 1.0, &cfg, &mut rng).map_err(|e| e.to_string())?.grad_gvif;
    }
    let mean = sum / n as f64;
    let err = rel(mean, 2.0 / 3.0);
    check(err <= 0.02, || format!("mean estimate {mean}, relative error {err}"))?;
    Ok(format!("mean of {n} estimates {mean:.5} (relative error {err:.4})"))
}

fn profile(id: u16, r: f64, psnr: f64) -> CoderProfile {
    CoderProfile { id, shrink_ratio: r, nominal_psnr_db: psnr, description: String::new() }
}

struct Family {
    name: &'static str,
    profiles: Vec<CoderProfile>,
    gvif: fn(&CoderProfile, f64, usize) -> f64,
    bits: fn(&CoderProfile, f64, usize) -> f64,
}

/// Items differ by a small per-item factor so batches matter.
fn item_factor(item: usize) -> f64 {
    1.0 + 0.05 * ((item % 5) as f64 - 2.0)
}

fn families() -> Vec<Family> {
    let ladder = |n: u16| (1..=n).map(|k| profile(k, 1.0 / (k as f64 + 1.0), 45.0 - k as f64)).collect::<Vec<_>>();
    vec![
        Family {
            name: "linear",
            profiles: ladder(4),
            gvif: |p, a, i| p.shrink_ratio.powf(1.2) * (1.0 - a) * item_factor(i),
            bits: |p, a, i| 100_000.0 * p.shrink_ratio * (1.0 - a) * item_factor(i),
        },
        Family {
            // the two highest-rate profiles do not fit even at the largest threshold
            name: "rate-capped",
            profiles: ladder(5),
            gvif: |p, a, _| p.shrink_ratio.powf(0.8) * (1.0 - 0.5 * a),
            bits: |p, a, _| 90_000.0 * p.shrink_ratio * (1.0 - 0.5 * a),
        },
        Family {
            name: "exponential",
            profiles: ladder(4),
            gvif: |p, a, i| p.shrink_ratio * (-2.0 * a).exp() * item_factor(i),
            bits: |p, a, i| 120_000.0 * p.shrink_ratio * (-3.0 * a).exp() * item_factor(i),
        },
        Family {
            // interior optimum, budget slack everywhere
            name: "interior-peak",
            profiles: ladder(3),
            gvif: |p, a, _| p.shrink_ratio * (1.0 - 4.0 * (a - 0.3) * (a - 0.3)),
            bits: |p, _, _| 1_000.0 * p.shrink_ratio,
        },
        Family {
            // fidelity falls faster than rate; a cheaper profile at a low
            // threshold can beat a richer one forced to a high threshold
            name: "convex-tradeoff",
            profiles: ladder(4),
            gvif: |p, a, _| p.shrink_ratio.powf(0.3) * (1.0 - a).powi(3),
            bits: |p, a, _| 50_000.0 * p.shrink_ratio * (1.0 - 0.9 * a),
        },
    ]
}

/// Best feasible `(profile, alpha, E[V])` on a 101-point grid over
/// `[0, alpha_th]`, lower-rate profile on ties.
fn grid_search(
    profiles: &[CoderProfile],
    oracle: &dyn EvalOracle,
    budget: f64,
    cfg: &OptimizerConfig,
) -> Option<(u16, f64, f64)> {
    let mut best: Option<(u16, f64, f64, f64)> = None;
    for p in profiles.iter().filter(|p| p.nominal_psnr_db >= cfg.d0_psnr_db) {
        for k in 0..=100 {
            let a = cfg.alpha_th * k as f64 / 100.0;
            let (v, b) = expected_values(oracle, p, a).unwrap();
            if b > budget {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, _, bv, bb)) => v > bv || (v == bv && b < bb),
            };
            if better {
                best = Some((p.id, a, v, b));
            }
        }
    }
    best.map(|(id, a, v, _)| (id, a, v))
}

fn criterion_7() -> Outcome {
    let ch = ChannelState::new(1.0, 1e6).unwrap();
    let cfg = OptimizerConfig::default();
    let budget = bit_budget(&ch, cfg.t_max).unwrap();
    let p = profile(1, 0.5, 40.0);
    let b0 = 2.0 * budget;
    let linear = FnOracle::new(16, |_, a, _| 1.0 - a, move |_, a, _| b0 * (1.0 - a));
    let alpha = optimize_threshold(&p, &linear, &ch, &cfg).map_err(|e| e.to_string())?.alpha_star;
    check((alpha - 0.5).abs() <= 0.02, || format!("linear family descent ended at {alpha}"))?;
    let slack = FnOracle::new(16, |_, a, _| 1.0 - a, move |_, a, _| 0.4 * b0 * (1.0 - a));
    let alpha0 = optimize_threshold(&p, &slack, &ch, &cfg).map_err(|e| e.to_string())?.alpha_star;
    check(alpha0 <= 0.02, || format!("slack budget descent ended at {alpha0}"))?;

    let mut lines = Vec::new();
    for f in families() {
        let o = FnOracle::new(20, f.gvif, f.bits);
        let sel = select_profile(&f.profiles, &o, &ch, &cfg).map_err(|e| format!("{}: {e}", f.name))?;
        let (gid, ga, gv) =
            grid_search(&f.profiles, &o, budget, &cfg).ok_or_else(|| format!("{}: grid empty", f.name))?;
        let c = &sel.chosen;
        let step = cfg.alpha_th / 100.0;
        check(c.profile.id == gid, || format!("{}: chose profile {} but grid picks {gid}", f.name, c.profile.id))?;
        check(c.feasible, || format!("{}: chosen point infeasible", f.name))?;
        check((c.alpha_star - ga).abs() <= 0.02 + step, || format!("{}: alpha {} vs grid {ga}", f.name, c.alpha_star))?;
        check(c.expected_gvif >= gv - 1e-3 * gv.abs().max(1e-9), || {
            format!("{}: E[V] {} vs grid {gv}", f.name, c.expected_gvif)
        })?;
        lines.push(format!("{} p{} a={:.3} (grid p{gid} a={ga:.3})", f.name, c.profile.id, c.alpha_star));
    }
    Ok(format!("linear descent alpha*={alpha:.4}, slack alpha*={alpha0:.4}; {}", lines.join("; ")))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn criterion_8() -> Outcome {
    let cfg = SimConfig::default();
    let data = synthetic_dataset(&SyntheticSpec::default(), &cfg.extractor).map_err(|e| e.to_string())?;
    let candidates: Vec<CoderProfile> = ProfileTable::default_table().lossy().cloned().collect();
    let oracle = DatasetOracle::new(&data, &candidates, &cfg).map_err(|e| e.to_string())?;
    let alphas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
    let mut table = Vec::new();
    for p in &candidates {
        let row: Vec<(f64, f64)> = alphas.iter().map(|&a| expected_values(&oracle, p, a).unwrap()).collect();
        let v: Vec<f64> = row.iter().map(|r| r.0).collect();
        check(strictly_decreasing(&v), || format!("profile {}: GVIF not strictly decreasing in alpha: {v:?}", p.id))?;
        table.push(row);
    }
    for (k, a) in alphas.iter().enumerate() {
        let mut by_rate: Vec<(f64, f64)> = table.iter().map(|row| (row[k].1, row[k].0)).collect();
        by_rate.sort_by(|x, y| x.0.total_cmp(&y.0));
        check(by_rate.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1), || {
            format!("alpha {a}: GVIF not strictly increasing with profile rate")
        })?;
    }
    let grid = [-10.0, -8.0, -6.0, -4.0, -2.0, 0.0];
    let rows = run_snr_sweep(&data, &oracle, &candidates, &grid, &[Scheme::Adaptive, Scheme::NoFilter], &cfg);
    if let Some(r) = rows.iter().find(|r| r.error.is_some()) {
        return Err(format!("sweep cell {} {} dB failed: {:?}", r.scheme.name(), r.snr_db, r.error));
    }
    let adaptive: Vec<_> = rows.iter().filter(|r| r.scheme == Scheme::Adaptive).collect();
    let plain: Vec<_> = rows.iter().filter(|r| r.scheme == Scheme::NoFilter).collect();
    let v: Vec<f64> = adaptive.iter().map(|r| r.mean_gvif).collect();
    check(v.windows(2).all(|w| w[1] >= w[0]), || format!("adaptive GVIF not nondecreasing in SNR: {v:?}"))?;
    let cliff = adaptive
        .iter()
        .zip(&plain)
        .find(|(a, p)| !p.feasible && a.feasible && a.mean_gvif > 0.0)
        .map(|(a, _)| a.snr_db);
    let cliff = cliff.ok_or_else(|| "no SNR where only the adaptive scheme meets the budget".to_string())?;
    Ok(format!(
        "{} profiles x 7 thresholds monotone; adaptive GVIF {:.4}..{:.4} over {}..{} dB; cliff contrast at {cliff} dB",
        candidates.len(),
        v[0],
        v[v.len() - 1],
        grid[0],
        grid[grid.len() - 1]
    ))
}

fn criterion_9() -> Outcome {
    let cfg = SimConfig::default();
    let data = synthetic_dataset(&SyntheticSpec::default(), &cfg.extractor).map_err(|e| e.to_string())?;
    let mask = dataset_mask(&data, 0.5, &cfg).map_err(|e| e.to_string())?;
    let profile = ProfileTable::default_table().get(1).cloned().unwrap();
    let rep = validate_generation_independence(&data, &mask, 4, &profile, &cfg).map_err(|e| e.to_string())?;
    let inside = rep.inside.ok_or("mask selects nothing")?;
    let outside = rep.outside.ok_or("mask selects everything")?;
    check(inside.count() >= 10_000 && outside.count() >= 10_000, || {
        format!("too few pairs: {} inside, {} outside", inside.count(), outside.count())
    })?;
    check(inside.value() > 0.99, || format!("inside r = {}", inside.value()))?;
    check(outside.value().abs() < 0.05, || format!("outside r = {}", outside.value()))?;
    Ok(format!(
        "inside r={:.6} ({} pairs), outside r={:.5} ({} pairs)",
        inside.value(),
        inside.count(),
        outside.value(),
        outside.count()
    ))
}

fn criterion_10() -> Outcome {
    let a = ChannelState::new(1.0, 1e6).unwrap();
    let b = ChannelState::new(3.0, 1e6).unwrap();
    let la = latency(5e5, &a).map_err(|e| e.to_string())?;
    let lb = latency(2e6, &b).map_err(|e| e.to_string())?;
    check(rel(capacity(&a), 1e6) <= 1e-12 && rel(capacity(&b), 2e6) <= 1e-12, || {
        format!("capacities {} and {}", capacity(&a), capacity(&b))
    })?;
    check(rel(la, 0.5) <= 1e-12, || format!("latency {la}, expected 0.5"))?;
    check(rel(lb, 1.0) <= 1e-12, || format!("latency {lb}, expected 1.0"))?;
    Ok(format!("latencies {la} s and {lb} s"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("GVIF boundary values", criterion_1, Duration::from_secs(1)),
        ("closed form equals per-element information oracle", criterion_2, Duration::from_secs(10)),
        ("GVIF monotonicity and scale invariance", criterion_3, Duration::from_secs(10)),
        ("feature codec lossless and near ideal", criterion_4, Duration::from_secs(30)),
        ("mask run-length coding", criterion_5, Duration::from_secs(10)),
        ("zero-order estimator calibration", criterion_6, Duration::from_secs(5)),
        ("threshold descent and profile selection", criterion_7, Duration::from_secs(60)),
        ("trends on the synthetic dataset", criterion_8, Duration::from_secs(300)),
        ("generated features independent outside the set", criterion_9, Duration::from_secs(30)),
        ("latency model", criterion_10, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} ({elapsed:.2?}): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({elapsed:.2?}): {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
