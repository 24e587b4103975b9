//! `GVSC` payload container.
//!
//! Header (little-endian): magic, version u8, flags u8 (bit 0: mask counted
//! in the rate), basis u8, block size u8, scale tile u8, image width u32,
//! height u32, feature dims 3 x u16, profile id u16, shrink ratio f32,
//! threshold f32, grid step f32, prompt length u32 and UTF-8 bytes.
//! Then three sections, side information, mask and features, each written
//! as byte length u32, bit count u32, bytes, CRC-32 of the bytes.

use gvif_core::codec::{FeatureBitstream, SideInfoBitstream};
use gvif_core::filter::MaskBitstream;
use gvif_core::transform::{Basis, ExtractorConfig};
use gvif_core::Dims;

use crate::error::{format_err, Result, SimError};

const MAGIC: &[u8; 4] = b"GVSC";
const VERSION: u8 = 1;
const FLAG_MASK_IN_RATE: u8 = 0x01;

#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub include_mask: bool,
    pub basis: Basis,
    pub block_size: usize,
    pub scale_tile: usize,
    pub width: usize,
    pub height: usize,
    pub feature_dims: Dims,
    pub profile_id: u16,
    pub shrink_ratio: f32,
    pub alpha: f32,
    pub grid_step: f32,
    /// Opaque text carried alongside the image; not part of the rate.
    pub prompt: String,
    pub side_info: SideInfoBitstream,
    pub mask: MaskBitstream,
    pub features: FeatureBitstream,
}

impl Payload {
    pub fn extractor(&self) -> ExtractorConfig {
        ExtractorConfig { block_size: self.block_size, scale_window: self.scale_tile, basis: self.basis }
    }

    /// `B_y + B_s`, plus `B_P` when the mask is counted.
    pub fn rate_bits(&self) -> u64 {
        let mask = if self.include_mask { self.mask.bit_count as u64 } else { 0 };
        self.features.bit_count() + self.side_info.bit_count() + mask
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let narrow = |v: usize, what: &str, max: usize| {
            if v > max {
                Err(format_err("payload", format!("{what} {v} does not fit the header")))
            } else {
                Ok(v)
            }
        };
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(if self.include_mask { FLAG_MASK_IN_RATE } else { 0 });
        out.push(match self.basis {
            Basis::Dct => 0,
            Basis::WalshHadamard => 1,
        });
        out.push(narrow(self.block_size, "block size", 255)? as u8);
        out.push(narrow(self.scale_tile, "scale tile", 255)? as u8);
        out.extend_from_slice(&(narrow(self.width, "width", u32::MAX as usize)? as u32).to_le_bytes());
        out.extend_from_slice(&(narrow(self.height, "height", u32::MAX as usize)? as u32).to_le_bytes());
        let d = self.feature_dims;
        for (v, what) in [(d.width, "feature width"), (d.height, "feature height"), (d.channels, "channels")] {
            out.extend_from_slice(&(narrow(v, what, u16::MAX as usize)? as u16).to_le_bytes());
        }
        out.extend_from_slice(&self.profile_id.to_le_bytes());
        out.extend_from_slice(&self.shrink_ratio.to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        out.extend_from_slice(&self.grid_step.to_le_bytes());
        out.extend_from_slice(&(narrow(self.prompt.len(), "prompt length", u32::MAX as usize)? as u32).to_le_bytes());
        out.extend_from_slice(self.prompt.as_bytes());
        let side_bits = self.side_info.bytes.len() * 8;
        let feature_bits = self.features.bytes.len() * 8;
        for (bytes, bits) in [
            (&self.side_info.bytes, side_bits),
            (&self.mask.bytes, self.mask.bit_count),
            (&self.features.bytes, feature_bits),
        ] {
            out.extend_from_slice(&(narrow(bytes.len(), "section length", u32::MAX as usize)? as u32).to_le_bytes());
            out.extend_from_slice(&(narrow(bits, "section bit count", u32::MAX as usize)? as u32).to_le_bytes());
            out.extend_from_slice(bytes);
            out.extend_from_slice(&crc32fast::hash(bytes).to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(format_err("payload", "missing GVSC magic"));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(format_err("payload", format!("unsupported version {version}")));
        }
        let flags = r.u8()?;
        if flags & !FLAG_MASK_IN_RATE != 0 {
            return Err(format_err("payload", format!("unknown flags {flags:#04x}")));
        }
        let basis = match r.u8()? {
            0 => Basis::Dct,
            1 => Basis::WalshHadamard,
            b => return Err(format_err("payload", format!("unknown basis {b}"))),
        };
        let block_size = r.u8()? as usize;
        let scale_tile = r.u8()? as usize;
        let width = r.u32()? as usize;
        let height = r.u32()? as usize;
        let feature_dims = Dims::new(r.u16()? as usize, r.u16()? as usize, r.u16()? as usize);
        let profile_id = r.u16()?;
        let shrink_ratio = r.f32()?;
        let alpha = r.f32()?;
        let grid_step = r.f32()?;
        let prompt_len = r.u32()? as usize;
        let prompt = String::from_utf8(r.take(prompt_len)?.to_vec())
            .map_err(|_| format_err("payload", "prompt is not UTF-8"))?;
        let (side, _) = r.section("side-info")?;
        let (mask, mask_bits) = r.section("mask")?;
        let (features, _) = r.section("features")?;
        if r.pos != bytes.len() {
            return Err(format_err("payload", "trailing bytes after the feature section"));
        }
        let payload = Payload {
            include_mask: flags & FLAG_MASK_IN_RATE != 0,
            basis,
            block_size,
            scale_tile,
            width,
            height,
            feature_dims,
            profile_id,
            shrink_ratio,
            alpha,
            grid_step,
            prompt,
            side_info: SideInfoBitstream { bytes: side },
            mask: MaskBitstream { bytes: mask, bit_count: mask_bits },
            features: FeatureBitstream { bytes: features },
        };
        payload.extractor().validate()?;
        if payload.extractor().feature_dims(width, height) != feature_dims {
            return Err(format_err("payload", "feature dims disagree with image size and block size"));
        }
        if !(shrink_ratio > 0.0 && shrink_ratio <= 1.0) || !(grid_step > 0.0 && grid_step.is_finite()) {
            return Err(format_err("payload", "shrink ratio or grid step out of range"));
        }
        Ok(payload)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format_err("payload", "truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        self.array().map(u16::from_le_bytes)
    }

    fn u32(&mut self) -> Result<u32> {
        self.array().map(u32::from_le_bytes)
    }

    fn f32(&mut self) -> Result<f32> {
        self.array().map(f32::from_le_bytes)
    }

    fn section(&mut self, name: &'static str) -> Result<(Vec<u8>, usize)> {
        let len = self.u32()? as usize;
        let bits = self.u32()? as usize;
        let data = self.take(len)?.to_vec();
        let crc = self.u32()?;
        if crc32fast::hash(&data) != crc {
            return Err(SimError::Checksum { section: name });
        }
        if bits > len * 8 || bits + 8 <= len * 8 {
            return Err(format_err("payload", format!("{name} bit count {bits} disagrees with {len} bytes")));
        }
        Ok((data, bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Payload {
        Payload {
            include_mask: true,
            basis: Basis::Dct,
            block_size: 8,
            scale_tile: 3,
            width: 20,
            height: 9,
            feature_dims: Dims::new(3, 2, 192),
            profile_id: 7,
            shrink_ratio: 0.25,
            alpha: 0.4,
            grid_step: 0.25,
            prompt: "a red ball".into(),
            side_info: SideInfoBitstream { bytes: vec![1, 2, 3] },
            mask: MaskBitstream { bytes: vec![0xA0], bit_count: 3 },
            features: FeatureBitstream { bytes: vec![9; 10] },
        }
    }

    #[test]
    fn roundtrip_and_rate() {
        let p = sample();
        let bytes = p.to_bytes().unwrap();
        assert_eq!(Payload::from_bytes(&bytes).unwrap(), p);
        assert_eq!(p.rate_bits(), 80 + 24 + 3);
        let q = Payload { include_mask: false, ..p };
        assert_eq!(q.rate_bits(), 104);
    }

    #[test]
    fn detects_corruption() {
        let bytes = sample().to_bytes().unwrap();
        let mut bad = bytes.clone();
        let last = bad.len() - 6;
        bad[last] ^= 1;
        assert!(matches!(Payload::from_bytes(&bad), Err(SimError::Checksum { section: "features" })));
        assert!(Payload::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Payload::from_bytes(&extra).is_err());
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(Payload::from_bytes(&magic).is_err());
    }
}
