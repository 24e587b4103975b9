//! Binary netpbm rasters: P6 (RGB) and P5 (gray, replicated to RGB).
//! Samples are rescaled to `[0, 255]` whatever the stored maxval.

use std::fs;
use std::path::Path;

use gvif_core::{Dims, ImageTensor, Tensor3};

use crate::error::{format_err, io_err, Result};

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' || !matches!(bytes[1], b'5' | b'6') {
        return Err(format_err("raster", "expected a P5 or P6 header"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err("raster", "bad header number"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err("raster", "header must end with one whitespace byte"));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 || !(1..=65535).contains(&maxval) {
        return Err(format_err("raster", format!("unsupported size {width}x{height} or maxval {maxval}")));
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        width: width as usize,
        height: height as usize,
        maxval,
        data_start: pos + 1,
    })
}

pub fn decode(bytes: &[u8]) -> Result<ImageTensor> {
    let h = parse_header(bytes)?;
    let colors = if h.magic[1] == b'6' { 3 } else { 1 };
    let sample_bytes = if h.maxval > 255 { 2 } else { 1 };
    let data = &bytes[h.data_start..];
    let expected = h.width * h.height * colors * sample_bytes;
    if data.len() != expected {
        return Err(format_err("raster", format!("expected {expected} sample bytes, found {}", data.len())));
    }
    let scale = 255.0 / h.maxval as f64;
    let sample = |k: usize| -> f64 {
        let raw =
            if sample_bytes == 2 { u16::from_be_bytes([data[2 * k], data[2 * k + 1]]) as f64 } else { data[k] as f64 };
        raw * scale
    };
    // netpbm stores rows top to bottom; x is the column index
    let pixels = Tensor3::from_fn(Dims::new(h.width, h.height, 3), |x, y, c| {
        let px = y * h.width + x;
        if colors == 3 {
            sample(px * 3 + c)
        } else {
            sample(px)
        }
    });
    Ok(ImageTensor::new(pixels)?)
}

/// Writes P6 with maxval 255, rounding and clamping each sample.
pub fn encode(image: &ImageTensor) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                out.push(image.get(x, y, c).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

pub fn read(path: &Path) -> Result<ImageTensor> {
    decode(&fs::read(path).map_err(io_err(path))?)
}

pub fn write(path: &Path, image: &ImageTensor) -> Result<()> {
    fs::write(path, encode(image)).map_err(io_err(path))
}
