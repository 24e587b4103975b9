//! Byte-oriented range coder with 32-bit range and carry propagation.
//!
//! Intervals are split with exact products, `floor(range * cum / total)`,
//! so any frequency table with `total <= 2^24` and nonzero frequencies is
//! decodable. The leading byte of every stream is always zero and is not
//! emitted; the flush writes the shortest suffix that stays inside the
//! final interval, and trailing zero bytes are dropped (the decoder reads
//! zeros past the end).

use alloc::vec::Vec;

use crate::error::{Error, Result};

const TOP: u32 = 1 << 24;

/// Largest admissible frequency total.
pub const MAX_TOTAL: u32 = TOP;

#[derive(Debug)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    pending: u64,
    started: bool,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder { low: 0, range: u32::MAX, cache: 0, pending: 1, started: false, out: Vec::new() }
    }

    /// Narrows the interval to `[cum, cum + freq)` out of `total`.
    pub fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total && total <= MAX_TOTAL);
        let r = self.range as u64;
        let lo = r * cum as u64 / total as u64;
        let hi = r * (cum + freq) as u64 / total as u64;
        self.low += lo;
        self.range = (hi - lo) as u32;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    /// Writes `bits` (at most 16) raw bits with a uniform model.
    pub fn encode_raw(&mut self, value: u32, bits: u32) {
        debug_assert!(bits <= 16 && value < (1 << bits));
        self.encode(value, 1, 1 << bits);
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low >= 1 << 32 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            while self.pending > 0 {
                if self.started {
                    self.out.push(byte.wrapping_add(carry));
                }
                self.started = true;
                byte = 0xFF;
                self.pending -= 1;
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.pending += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    pub fn finish(mut self) -> Vec<u8> {
        // pick the value in [low, low + range) with the most trailing zeros
        let high = self.low + self.range as u64;
        for k in 0..=4u32 {
            let unit = 1u64 << (32 - 8 * k);
            let v = self.low.div_ceil(unit) * unit;
            if v < high {
                self.low = v;
                break;
            }
        }
        for _ in 0..5 {
            self.shift_low();
        }
        while self.out.last() == Some(&0) {
            self.out.pop();
        }
        self.out
    }
}

#[derive(Debug)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        let mut d = RangeDecoder { data, pos: 0, code: 0, range: u32::MAX };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte() as u32;
        }
        d
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// Cumulative frequency slot of the next symbol, in `0..total`.
    pub fn target(&self, total: u32) -> Result<u32> {
        if self.code >= self.range {
            return Err(Error::CorruptStream("range coder state out of interval"));
        }
        let t = ((self.code as u64 + 1) * total as u64 - 1) / self.range as u64;
        Ok(t as u32)
    }

    /// Consumes the symbol occupying `[cum, cum + freq)`.
    pub fn consume(&mut self, cum: u32, freq: u32, total: u32) -> Result<()> {
        let r = self.range as u64;
        let lo = (r * cum as u64 / total as u64) as u32;
        let hi = (r * (cum + freq) as u64 / total as u64) as u32;
        if self.code < lo || self.code >= hi {
            return Err(Error::CorruptStream("symbol outside decoded interval"));
        }
        self.code -= lo;
        self.range = hi - lo;
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | self.next_byte() as u32;
        }
        Ok(())
    }

    pub fn decode_raw(&mut self, bits: u32) -> Result<u32> {
        let total = 1 << bits;
        let v = self.target(total)?;
        self.consume(v, 1, total)?;
        Ok(v)
    }

    /// Fails if the stream holds bytes the decoder never needed.
    pub fn finish(self) -> Result<()> {
        if self.data.len() > self.pos {
            return Err(Error::CorruptStream("trailing bytes after range-coded data"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_roundtrip() {
        let values = [0u32, 1, 65535, 1234, 40000, 7];
        let mut e = RangeEncoder::new();
        for v in values {
            e.encode_raw(v, 16);
        }
        let bytes = e.finish();
        assert!(bytes.len() <= 12);
        let mut d = RangeDecoder::new(&bytes);
        for v in values {
            assert_eq!(d.decode_raw(16).unwrap(), v);
        }
        d.finish().unwrap();
    }

    #[test]
    fn empty_stream_is_empty() {
        assert!(RangeEncoder::new().finish().is_empty());
    }

    #[test]
    fn skewed_model_roundtrip_and_size() {
        // p(0) = 255/256
        let freqs = [255u32, 1];
        let total = 256;
        let symbols: Vec<usize> = (0..4000).map(|k| usize::from(k % 97 == 0)).collect();
        let mut e = RangeEncoder::new();
        for &s in &symbols {
            let cum = if s == 0 { 0 } else { 255 };
            e.encode(cum, freqs[s], total);
        }
        let bytes = e.finish();
        let ideal: f64 = symbols.iter().map(|&s| -libm::log2(freqs[s] as f64 / total as f64)).sum();
        assert!((bytes.len() * 8) as f64 <= ideal + 32.0);
        let mut d = RangeDecoder::new(&bytes);
        for &s in &symbols {
            let t = d.target(total).unwrap();
            let got = usize::from(t >= 255);
            assert_eq!(got, s);
            d.consume(if got == 0 { 0 } else { 255 }, freqs[got], total).unwrap();
        }
        d.finish().unwrap();
    }

    #[test]
    fn trailing_garbage_detected() {
        let mut e = RangeEncoder::new();
        e.encode_raw(5, 8);
        let mut bytes = e.finish();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let mut d = RangeDecoder::new(&bytes);
        d.decode_raw(8).unwrap();
        assert!(d.finish().is_err());
    }
}
