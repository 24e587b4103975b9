//! Scale side information: log2-grid quantization plus an adaptive
//! zero-order model over grid indices.

use alloc::vec;
use alloc::vec::Vec;

use super::range::{RangeDecoder, RangeEncoder};
use crate::error::{invalid, Error, Result};
use crate::tensor::{Dims, FeatureTensor, ScaleField, Tensor3, THETA_FLOOR};

pub const DEFAULT_GRID_STEP: f64 = 0.25;

const INCREMENT: u32 = 32;
const RESCALE_LIMIT: u32 = 1 << 16;

fn check_step(step: f64) -> Result<()> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(invalid("grid step must be positive"))
    }
}

/// `round(log2(theta) / step)`.
pub fn grid_index(theta: f64, step: f64) -> i32 {
    libm::round(libm::log2(theta) / step) as i32
}

/// `max(THETA_FLOOR, 2^(n * step))`.
pub fn grid_value(n: i32, step: f64) -> f64 {
    libm::exp2(n as f64 * step).max(THETA_FLOOR)
}

pub fn quantize_to_grid(theta: &ScaleField, step: f64) -> Result<ScaleField> {
    check_step(step)?;
    ScaleField::new(theta.tensor().map(|t| grid_value(grid_index(t, step), step)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideInfoBitstream {
    pub bytes: Vec<u8>,
}

impl SideInfoBitstream {
    /// `B_s`; the stream is byte aligned.
    pub fn bit_count(&self) -> u64 {
        self.bytes.len() as u64 * 8
    }
}

struct AdaptiveModel {
    counts: Vec<u32>,
    total: u32,
}

impl AdaptiveModel {
    fn new(size: usize) -> Self {
        AdaptiveModel { counts: vec![1; size], total: size as u32 }
    }

    fn cum(&self, s: usize) -> u32 {
        self.counts[..s].iter().sum()
    }

    fn update(&mut self, s: usize) {
        self.counts[s] += INCREMENT;
        self.total += INCREMENT;
        if self.total > RESCALE_LIMIT {
            for c in &mut self.counts {
                *c = c.div_ceil(2);
            }
            self.total = self.counts.iter().sum();
        }
    }

    fn encode(&mut self, enc: &mut RangeEncoder, s: usize) {
        enc.encode(self.cum(s), self.counts[s], self.total);
        self.update(s);
    }

    fn decode(&mut self, dec: &mut RangeDecoder<'_>) -> Result<usize> {
        let t = dec.target(self.total)?;
        let mut cum = 0;
        let mut s = 0;
        while cum + self.counts[s] <= t {
            cum += self.counts[s];
            s += 1;
        }
        dec.consume(cum, self.counts[s], self.total)?;
        self.update(s);
        Ok(s)
    }
}

/// Codes each field's grid indices: a 16-bit header per dimension, the
/// minimum index and alphabet size, then the adaptively modeled indices.
pub fn encode_side_info(fields: &[&ScaleField], step: f64) -> Result<SideInfoBitstream> {
    check_step(step)?;
    if fields.len() > 255 {
        return Err(invalid("too many side-information fields"));
    }
    let mut enc = RangeEncoder::new();
    enc.encode_raw(fields.len() as u32, 8);
    for field in fields {
        let d = field.dims();
        for n in [d.width, d.height, d.channels] {
            if n > u16::MAX as usize {
                return Err(invalid("side-information dims exceed 16 bits"));
            }
            enc.encode_raw(n as u32, 16);
        }
        let idx: Vec<i32> = field.as_slice().iter().map(|&t| grid_index(t, step)).collect();
        let (lo, hi) = match (idx.iter().min(), idx.iter().max()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => continue,
        };
        if lo < i16::MIN as i32 || hi > i16::MAX as i32 || hi - lo >= u16::MAX as i32 {
            return Err(invalid("grid index range too wide"));
        }
        enc.encode_raw(lo as i16 as u16 as u32, 16);
        enc.encode_raw((hi - lo) as u32, 16);
        let mut model = AdaptiveModel::new((hi - lo + 1) as usize);
        for n in idx {
            model.encode(&mut enc, (n - lo) as usize);
        }
    }
    Ok(SideInfoBitstream { bytes: enc.finish() })
}

pub fn decode_side_info(stream: &SideInfoBitstream, step: f64) -> Result<Vec<ScaleField>> {
    check_step(step)?;
    let mut dec = RangeDecoder::new(&stream.bytes);
    let count = dec.decode_raw(8)?;
    let mut fields = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let w = dec.decode_raw(16)? as usize;
        let h = dec.decode_raw(16)? as usize;
        let c = dec.decode_raw(16)? as usize;
        let dims = Dims::new(w, h, c);
        if dims.is_empty() {
            fields.push(ScaleField::new(Tensor3::filled(dims, THETA_FLOOR))?);
            continue;
        }
        let lo = dec.decode_raw(16)? as u16 as i16 as i32;
        let span = dec.decode_raw(16)? as usize;
        let mut model = AdaptiveModel::new(span + 1);
        let mut data = Vec::with_capacity(dims.len());
        for _ in 0..dims.len() {
            let s = model.decode(&mut dec)?;
            data.push(grid_value(lo + s as i32, step));
        }
        fields.push(ScaleField::new(Tensor3::from_vec(dims, data)?)?);
    }
    dec.finish()?;
    Ok(fields)
}

/// Separable scale model `theta_ijc = g(tile(i, j)) * sigma_c`: a per-channel
/// profile times a spatial gain on `tile x tile` position tiles. Both
/// factors live on the log2 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperScale {
    pub channel: ScaleField,
    pub gain: ScaleField,
    pub tile: usize,
}

impl HyperScale {
    pub fn estimate(features: &FeatureTensor, tile: usize, step: f64) -> Result<Self> {
        check_step(step)?;
        if tile == 0 {
            return Err(invalid("tile size must be positive"));
        }
        features.check_finite()?;
        let d = features.dims();
        if d.is_empty() {
            return Err(Error::Degenerate("empty feature tensor"));
        }
        let mut sigma = vec![0.0; d.channels];
        for (idx, v) in features.as_slice().iter().enumerate() {
            sigma[idx % d.channels] += v * v;
        }
        let positions = d.positions() as f64;
        let sigma: Vec<f64> = sigma
            .iter()
            .map(|s| grid_value(grid_index(libm::sqrt(s / positions).max(THETA_FLOOR), step), step))
            .collect();
        let gd = Dims::new(d.width.div_ceil(tile), d.height.div_ceil(tile), 1);
        let mut acc = vec![0.0; gd.len()];
        let mut n = vec![0usize; gd.len()];
        for i in 0..d.width {
            for j in 0..d.height {
                let g = gd.index(i / tile, j / tile, 0);
                for (c, s) in sigma.iter().enumerate() {
                    let v = features.get(i, j, c) / s;
                    acc[g] += v * v;
                }
                n[g] += d.channels;
            }
        }
        let gain = acc
            .iter()
            .zip(&n)
            .map(|(a, &k)| grid_value(grid_index(libm::sqrt(a / k as f64).max(THETA_FLOOR), step), step))
            .collect();
        Ok(HyperScale {
            channel: ScaleField::new(Tensor3::from_vec(Dims::new(1, 1, d.channels), sigma)?)?,
            gain: ScaleField::new(Tensor3::from_vec(gd, gain)?)?,
            tile,
        })
    }

    pub fn grid_dims(dims: Dims, tile: usize) -> Dims {
        Dims::new(dims.width.div_ceil(tile), dims.height.div_ceil(tile), 1)
    }

    /// Full-resolution field for features of shape `dims`.
    pub fn expand(&self, dims: Dims) -> Result<ScaleField> {
        if self.channel.dims() != Dims::new(1, 1, dims.channels) {
            return Err(Error::DimensionMismatch {
                expected: Dims::new(1, 1, dims.channels),
                found: self.channel.dims(),
            });
        }
        Self::grid_dims(dims, self.tile).expect(self.gain.dims())?;
        let t = self.tile;
        ScaleField::new(Tensor3::from_fn(dims, |i, j, c| self.gain.get(i / t, j / t, 0) * self.channel.get(0, 0, c)))
    }

    pub fn encode(&self, step: f64) -> Result<SideInfoBitstream> {
        encode_side_info(&[&self.channel, &self.gain], step)
    }

    pub fn decode(stream: &SideInfoBitstream, step: f64, tile: usize) -> Result<Self> {
        let mut fields = decode_side_info(stream, step)?;
        if fields.len() != 2 {
            return Err(Error::CorruptStream("side information must hold two fields"));
        }
        let gain = fields.pop().unwrap();
        let channel = fields.pop().unwrap();
        Ok(HyperScale { channel, gain, tile })
    }
}
