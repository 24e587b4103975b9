//! `GVTF` tensor files: magic, version, dtype, rank, little-endian u32 dims,
//! then the row-major little-endian payload.

use std::fs;
use std::path::Path;

use gvif_core::{Dims, Tensor3};

use crate::error::{format_err, io_err, Result};

const MAGIC: &[u8; 4] = b"GVTF";
const VERSION: u8 = 0x01;
const DTYPE_F32: u8 = 0x01;
const DTYPE_I32: u8 = 0x02;

#[derive(Debug, Clone, PartialEq)]
pub enum GvtfTensor {
    F32(Tensor3<f64>),
    I32(Tensor3<i32>),
}

impl GvtfTensor {
    pub fn dims(&self) -> Dims {
        match self {
            GvtfTensor::F32(t) => t.dims(),
            GvtfTensor::I32(t) => t.dims(),
        }
    }

    pub fn into_f64(self) -> Tensor3<f64> {
        match self {
            GvtfTensor::F32(t) => t,
            GvtfTensor::I32(t) => t.map(|v| v as f64),
        }
    }
}

fn header(dtype: u8, dims: Dims) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 12 + dims.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, dtype, 3]);
    for d in [dims.width, dims.height, dims.channels] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out
}

pub fn encode(t: &GvtfTensor) -> Vec<u8> {
    match t {
        GvtfTensor::F32(t) => {
            let mut out = header(DTYPE_F32, t.dims());
            for v in t.as_slice() {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
            out
        }
        GvtfTensor::I32(t) => {
            let mut out = header(DTYPE_I32, t.dims());
            for v in t.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out
        }
    }
}

/// Ranks 1 to 3 are accepted; missing trailing dims are taken as 1.
pub fn decode(bytes: &[u8]) -> Result<GvtfTensor> {
    if bytes.len() < 7 || &bytes[..4] != MAGIC {
        return Err(format_err("tensor file", "missing GVTF magic"));
    }
    if bytes[4] != VERSION {
        return Err(format_err("tensor file", format!("unsupported version {}", bytes[4])));
    }
    let (dtype, rank) = (bytes[5], bytes[6] as usize);
    if !(1..=3).contains(&rank) {
        return Err(format_err("tensor file", format!("unsupported rank {rank}")));
    }
    let body = &bytes[7..];
    if body.len() < rank * 4 {
        return Err(format_err("tensor file", "truncated dims"));
    }
    let mut dims = [1usize; 3];
    for (k, d) in dims.iter_mut().take(rank).enumerate() {
        *d = u32::from_le_bytes(body[k * 4..k * 4 + 4].try_into().unwrap()) as usize;
    }
    let dims = Dims::new(dims[0], dims[1], dims[2]);
    let payload = &body[rank * 4..];
    if payload.len() != dims.len() * 4 {
        return Err(format_err(
            "tensor file",
            format!("payload of {} bytes does not match dims {dims}", payload.len()),
        ));
    }
    let words = payload.chunks_exact(4).map(|c| <[u8; 4]>::try_from(c).unwrap());
    match dtype {
        DTYPE_F32 => {
            Ok(GvtfTensor::F32(Tensor3::from_vec(dims, words.map(|w| f32::from_le_bytes(w) as f64).collect())?))
        }
        DTYPE_I32 => Ok(GvtfTensor::I32(Tensor3::from_vec(dims, words.map(i32::from_le_bytes).collect())?)),
        other => Err(format_err("tensor file", format!("unknown dtype {other:#04x}"))),
    }
}

pub fn read(path: &Path) -> Result<GvtfTensor> {
    decode(&fs::read(path).map_err(io_err(path))?)
}

pub fn write(path: &Path, t: &GvtfTensor) -> Result<()> {
    fs::write(path, encode(t)).map_err(io_err(path))
}
