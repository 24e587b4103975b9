//! Arithmetic coding of the selected quantized features under the
//! conditional Gaussian model.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::range::{RangeDecoder, RangeEncoder, MAX_TOTAL};
use super::{conditional_pmf, support_radius, tail_mass, P_FLOOR};
use crate::error::{Error, Result};
use crate::filter::{FilterSet, IndexSet};
use crate::tensor::{QuantizedTensor, ScaleField, Tensor3};

const ESCAPE: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBitstream {
    pub bytes: Vec<u8>,
}

impl FeatureBitstream {
    /// `B_y`; the stream is byte aligned.
    pub fn bit_count(&self) -> u64 {
        self.bytes.len() as u64 * 8
    }
}

/// Quantized frequency table for one scale value. Slot 0 is the escape
/// symbol, slot `1 + k + K` holds `k` in `[-K, K]`.
#[derive(Debug)]
struct FreqTable {
    radius: i64,
    cum: Vec<u32>,
}

impl FreqTable {
    fn new(theta: f64) -> Self {
        let radius = support_radius(theta);
        let n = (2 * radius + 2) as usize;
        let mut p = Vec::with_capacity(n);
        p.push(tail_mass(radius, theta).max(P_FLOOR));
        p.extend((-radius..=radius).map(|k| conditional_pmf(k, theta)));
        let sum: f64 = p.iter().sum();
        let spare = (MAX_TOTAL as usize - n) as f64 / sum;
        let mut freq: Vec<u32> = p.iter().map(|v| 1 + libm::floor(v * spare) as u32).collect();
        let used: u64 = freq.iter().map(|&f| f as u64).sum();
        freq[1 + radius as usize] += (MAX_TOTAL as u64 - used) as u32;
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0;
        cum.push(0);
        for f in freq {
            acc += f;
            cum.push(acc);
        }
        FreqTable { radius, cum }
    }

    fn slot(&self, k: i32) -> Option<usize> {
        let k = k as i64;
        (k.abs() <= self.radius).then(|| (1 + k + self.radius) as usize)
    }

    fn encode(&self, enc: &mut RangeEncoder, slot: usize) {
        enc.encode(self.cum[slot], self.cum[slot + 1] - self.cum[slot], MAX_TOTAL);
    }

    fn decode(&self, dec: &mut RangeDecoder<'_>) -> Result<usize> {
        let t = dec.target(MAX_TOTAL)?;
        let slot = self.cum.partition_point(|&c| c <= t) - 1;
        dec.consume(self.cum[slot], self.cum[slot + 1] - self.cum[slot], MAX_TOTAL)?;
        Ok(slot)
    }
}

/// Cache of frequency tables keyed by the exact scale value. Encoder and
/// decoder build identical tables from identical scales.
#[derive(Debug, Default)]
pub struct FeatureModel {
    tables: BTreeMap<u64, FreqTable>,
}

impl FeatureModel {
    pub fn new() -> Self {
        Self::default()
    }

    fn table(&mut self, theta: f64) -> &FreqTable {
        self.tables.entry(theta.to_bits()).or_insert_with(|| FreqTable::new(theta))
    }

    /// Model code length of `k` under scale `theta`, escapes included.
    pub fn symbol_bits(&mut self, k: i32, theta: f64) -> f64 {
        let radius = self.table(theta).radius;
        if (k as i64).abs() <= radius {
            -libm::log2(conditional_pmf(k as i64, theta))
        } else {
            -libm::log2(tail_mass(radius, theta).max(P_FLOOR)) + 32.0
        }
    }
}

fn check_dims(q: &QuantizedTensor, theta: &ScaleField, set: &FilterSet) -> Result<()> {
    q.dims().expect(theta.dims())?;
    q.dims().expect(set.dims())
}

/// Codes the elements of `set` in flat `(i, j, c)` order.
pub fn encode_features(
    q: &QuantizedTensor,
    theta: &ScaleField,
    set: &FilterSet,
    model: &mut FeatureModel,
) -> Result<FeatureBitstream> {
    check_dims(q, theta, set)?;
    let mut enc = RangeEncoder::new();
    for (idx, (&k, &t)) in q.as_slice().iter().zip(theta.as_slice()).enumerate() {
        if !set.contains_flat(idx) {
            continue;
        }
        let table = model.table(t);
        match table.slot(k) {
            Some(slot) => table.encode(&mut enc, slot),
            None => {
                table.encode(&mut enc, ESCAPE);
                let raw = k as u32;
                enc.encode_raw(raw >> 16, 16);
                enc.encode_raw(raw & 0xFFFF, 16);
            }
        }
    }
    Ok(FeatureBitstream { bytes: enc.finish() })
}

/// Inverse of [`encode_features`]; elements outside `set` are zero.
pub fn decode_features(
    stream: &FeatureBitstream,
    theta: &ScaleField,
    set: &FilterSet,
    model: &mut FeatureModel,
) -> Result<QuantizedTensor> {
    theta.dims().expect(set.dims())?;
    let mut out = Tensor3::filled(theta.dims(), 0i32);
    let mut dec = RangeDecoder::new(&stream.bytes);
    for (idx, (v, &t)) in out.as_mut_slice().iter_mut().zip(theta.as_slice()).enumerate() {
        if !set.contains_flat(idx) {
            continue;
        }
        let table = model.table(t);
        let slot = table.decode(&mut dec)?;
        *v = if slot == ESCAPE {
            let hi = dec.decode_raw(16)?;
            let lo = dec.decode_raw(16)?;
            let k = ((hi << 16) | lo) as i32;
            if (k as i64).abs() <= table.radius {
                return Err(Error::CorruptStream("escape used for an in-support value"));
            }
            k
        } else {
            (slot as i64 - 1 - table.radius) as i32
        };
    }
    dec.finish()?;
    Ok(out)
}

/// `sum_P -log2 P(k | theta)`, the information content the coder targets.
pub fn ideal_feature_bits(
    q: &QuantizedTensor,
    theta: &ScaleField,
    set: &FilterSet,
    model: &mut FeatureModel,
) -> Result<f64> {
    check_dims(q, theta, set)?;
    Ok(q.as_slice()
        .iter()
        .zip(theta.as_slice())
        .enumerate()
        .filter(|(idx, _)| set.contains_flat(*idx))
        .map(|(_, (&k, &t))| model.symbol_bits(k, t))
        .sum())
}
