use gvif_core::channel::{bit_budget, ChannelState};
use gvif_core::codec::range::{RangeDecoder, RangeEncoder};
use gvif_core::codec::{decode_features, encode_features, ideal_feature_bits, quantize, FeatureModel, HyperScale};
use gvif_core::filter::{
    bilinear_resize, build_filter_set, decode_mask, encode_mask, FilterSet, ImportanceMatrix, Map2,
};
use gvif_core::generate::surrogate_generate;
use gvif_core::gsm::{sample_gsm_features, CoderProfile};
use gvif_core::metric::{gvif, HvsParams};
use gvif_core::optimizer::{optimize_threshold, FnOracle, OptimizerConfig};
use gvif_core::transform::{extract_features, reconstruct_unclamped, Basis, ExtractorConfig};
use gvif_core::{Dims, ImageTensor, ScaleField, ScalingField, Tensor3};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = Dims> {
    (1usize..12, 1usize..12, 1usize..6).prop_map(|(w, h, c)| Dims::new(w, h, c))
}

fn theta_for(d: Dims) -> impl Strategy<Value = ScaleField> {
    prop::collection::vec(-4.0f64..4.0, d.len())
        .prop_map(move |v| ScaleField::new(Tensor3::from_vec(d, v.iter().map(|e| e.exp()).collect()).unwrap()).unwrap())
}

fn mask_for(d: Dims) -> impl Strategy<Value = FilterSet> {
    prop::collection::vec(any::<bool>(), d.positions())
        .prop_map(move |m| FilterSet::from_mask(d.width, d.height, d.channels, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_roundtrip(
        w in 1usize..40,
        h in 1usize..40,
        wht in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cfg = ExtractorConfig {
            basis: if wht { Basis::WalshHadamard } else { Basis::Dct },
            ..ExtractorConfig::default()
        };
        let mut s = seed;
        let img = ImageTensor::new(Tensor3::from_fn(Dims::new(w, h, 3), |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 56) as f64
        }))
        .unwrap();
        let (f, pad) = extract_features(&img, &cfg).unwrap();
        prop_assert_eq!(f.dims(), cfg.feature_dims(w, h));
        let back = reconstruct_unclamped(&f, &cfg, pad).unwrap();
        prop_assert_eq!(back.dims(), img.dims());
        for (a, b) in back.as_slice().iter().zip(img.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn gvif_in_unit_interval_and_nested((d, theta, inner, extra, b) in dims().prop_flat_map(|d| {
        (Just(d), theta_for(d), mask_for(d), mask_for(d), prop::collection::vec(0.0f64..=1.0, d.len()))
    })) {
        let hvs = HvsParams::default();
        let beta = ScalingField::from_values(Tensor3::from_vec(d, b).unwrap()).unwrap();
        let outer_mask: Vec<bool> = inner.mask().iter().zip(extra.mask()).map(|(a, b)| *a || *b).collect();
        let outer = FilterSet::from_mask(d.width, d.height, d.channels, outer_mask).unwrap();
        let vi = gvif(&theta, &beta, &inner, &hvs).unwrap().value;
        let vo = gvif(&theta, &beta, &outer, &hvs).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&vi));
        prop_assert!(vo >= vi);
    }

    #[test]
    fn feature_codec_roundtrip((d, theta, set, seed) in dims().prop_flat_map(|d| {
        (Just(d), theta_for(d), mask_for(d), any::<u64>())
    })) {
        let q = quantize(&sample_gsm_features(&theta, seed)).unwrap();
        let stream = encode_features(&q, &theta, &set, &mut FeatureModel::new()).unwrap();
        let back = decode_features(&stream, &theta, &set, &mut FeatureModel::new()).unwrap();
        let ideal = ideal_feature_bits(&q, &theta, &set, &mut FeatureModel::new()).unwrap();
        prop_assert!(stream.bit_count() as f64 <= ideal + 32.0);
        for (k, (&a, &b)) in back.as_slice().iter().zip(q.as_slice()).enumerate() {
            prop_assert_eq!(a, if set.mask()[k / d.channels] { b } else { 0 });
        }
    }

    #[test]
    fn escapes_roundtrip(values in prop::collection::vec(-100_000i32..100_000, 1..64)) {
        // tiny scales push nearly every value into the escape path
        let d = Dims::new(values.len(), 1, 1);
        let q = Tensor3::from_vec(d, values).unwrap();
        let theta = ScaleField::constant(d, 0.01).unwrap();
        let set = FilterSet::full(d);
        let stream = encode_features(&q, &theta, &set, &mut FeatureModel::new()).unwrap();
        let back = decode_features(&stream, &theta, &set, &mut FeatureModel::new()).unwrap();
        prop_assert_eq!(back, q);
    }

    #[test]
    fn range_coder_raw_roundtrip(values in prop::collection::vec((any::<u32>(), 1u32..=16), 0..200)) {
        let mut enc = RangeEncoder::new();
        for &(v, n) in &values {
            enc.encode_raw(v & ((1 << n) - 1), n);
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes);
        for &(v, n) in &values {
            prop_assert_eq!(dec.decode_raw(n).unwrap(), v & ((1 << n) - 1));
        }
    }

    #[test]
    fn mask_roundtrip((d, set) in dims().prop_flat_map(|d| (Just(d), mask_for(d)))) {
        let stream = encode_mask(&set).unwrap();
        prop_assert_eq!(decode_mask(&stream, d.channels).unwrap(), set);
    }

    #[test]
    fn side_info_roundtrip((d, theta, tile) in dims().prop_flat_map(|d| (Just(d), theta_for(d), 1usize..5))) {
        let step = 0.25;
        let f = sample_gsm_features(&theta, 9);
        let hs = HyperScale::estimate(&f, tile, step).unwrap();
        let back = HyperScale::decode(&hs.encode(step).unwrap(), step, tile).unwrap();
        prop_assert_eq!(back.expand(d).unwrap(), hs.expand(d).unwrap());
    }

    #[test]
    fn filter_sets_shrink_with_threshold(
        (w, h, v) in (1usize..16, 1usize..16).prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(0.0f64..=1.0, w * h))),
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
    ) {
        let imp = ImportanceMatrix::new(Map2::from_vec(w, h, v).unwrap()).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = build_filter_set(&imp, lo, 3).unwrap();
        let s_hi = build_filter_set(&imp, hi, 3).unwrap();
        prop_assert!(s_hi.is_subset_of(&s_lo));
    }

    #[test]
    fn resize_keeps_constants(w in 1usize..10, h in 1usize..10, tw in 1usize..30, th in 1usize..30, c in -5.0f64..5.0) {
        let m = bilinear_resize(&Map2::from_fn(w, h, |_, _| c), tw, th).unwrap();
        prop_assert!(m.as_slice().iter().all(|v| (v - c).abs() < 1e-12));
    }

    #[test]
    fn generation_keeps_the_set((d, theta, set, seed) in dims().prop_flat_map(|d| {
        (Just(d), theta_for(d), mask_for(d), any::<u64>())
    })) {
        let q = quantize(&sample_gsm_features(&theta, seed)).unwrap();
        let g = surrogate_generate(&q, &set, &theta, seed ^ 1).unwrap();
        for (k, (&a, &b)) in g.as_slice().iter().zip(q.as_slice()).enumerate() {
            if set.mask()[k / d.channels] {
                prop_assert_eq!(a, b as f64);
            }
        }
    }

    #[test]
    fn descent_stays_in_range(slope in -5.0f64..5.0, scale in 0.1f64..10.0, seed in any::<u64>()) {
        let ch = ChannelState::new(1.0, 1e6).unwrap();
        let cfg = OptimizerConfig { seed, ..OptimizerConfig::default() };
        let budget = bit_budget(&ch, cfg.t_max).unwrap();
        let o = FnOracle::new(8, move |_, a, _| slope * a, move |_, a, _| scale * budget * (1.0 - a));
        let p = CoderProfile { id: 1, shrink_ratio: 0.5, nominal_psnr_db: 40.0, description: String::new() };
        let r = optimize_threshold(&p, &o, &ch, &cfg).unwrap();
        prop_assert!(r.trace.iter().all(|t| (0.0..=cfg.alpha_th).contains(&t.alpha)));
        prop_assert!((0.0..=cfg.alpha_th).contains(&r.alpha_star));
    }
}
