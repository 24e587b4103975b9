//! Run-length coding of the spatial mask with Elias-gamma run lengths.
//!
//! Layout (MSB-first bits): width u16, height u16, first mask bit, then one
//! gamma code per run in flat `(i, j)` order.

use alloc::vec::Vec;

use super::FilterSet;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskBitstream {
    pub bytes: Vec<u8>,
    pub bit_count: usize,
}

struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    fn push(&mut self, bit: bool) {
        if self.bits.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.bits % 8);
        }
        self.bits += 1;
    }

    fn push_bits(&mut self, value: u64, n: u32) {
        for k in (0..n).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    fn push_gamma(&mut self, n: u64) {
        let len = 64 - n.leading_zeros();
        self.push_bits(0, len - 1);
        self.push_bits(n, len);
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    limit: usize,
    pos: usize,
}

impl BitReader<'_> {
    fn bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit {
            return Err(Error::CorruptStream("mask stream truncated"));
        }
        let b = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(b)
    }

    fn bits(&mut self, n: u32) -> Result<u64> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    fn gamma(&mut self) -> Result<u64> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros > 40 {
                return Err(Error::CorruptStream("mask run length overflow"));
            }
        }
        Ok((1 << zeros) | self.bits(zeros)?)
    }
}

/// Alternating run lengths of a flat bit sequence.
pub fn mask_runs(bits: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut iter = bits.iter().peekable();
    while let Some(&b) = iter.next() {
        let mut n = 1;
        while iter.next_if(|&&x| x == b).is_some() {
            n += 1;
        }
        runs.push(n);
    }
    runs
}

pub fn encode_mask(set: &FilterSet) -> Result<MaskBitstream> {
    let (w, h) = (set.width(), set.height());
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(invalid("mask dims exceed 16 bits"));
    }
    let mut out = BitWriter { bytes: Vec::new(), bits: 0 };
    out.push_bits(w as u64, 16);
    out.push_bits(h as u64, 16);
    if let Some(&first) = set.mask().first() {
        out.push(first);
        for run in mask_runs(set.mask()) {
            out.push_gamma(run as u64);
        }
    }
    Ok(MaskBitstream { bytes: out.bytes, bit_count: out.bits })
}

pub fn decode_mask(stream: &MaskBitstream, channels: usize) -> Result<FilterSet> {
    if stream.bit_count > stream.bytes.len() * 8 {
        return Err(Error::CorruptStream("mask bit count exceeds data"));
    }
    let mut r = BitReader { bytes: &stream.bytes, limit: stream.bit_count, pos: 0 };
    let w = r.bits(16)? as usize;
    let h = r.bits(16)? as usize;
    let total = w * h;
    let mut mask = Vec::with_capacity(total);
    if total > 0 {
        let mut bit = r.bit()?;
        while mask.len() < total {
            let run = r.gamma()? as usize;
            if run > total - mask.len() {
                return Err(Error::CorruptStream("mask run overruns dims"));
            }
            mask.extend(core::iter::repeat_n(bit, run));
            bit = !bit;
        }
    }
    if r.pos != stream.bit_count {
        return Err(Error::CorruptStream("trailing bits after mask"));
    }
    FilterSet::from_mask(w, h, channels, mask)
}
