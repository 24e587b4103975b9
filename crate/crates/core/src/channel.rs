//! Capacity and latency of an error-free link at Shannon capacity.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    snr_linear: f64,
    bandwidth_hz: f64,
}

pub const DEFAULT_BANDWIDTH_HZ: f64 = 1e6;

impl ChannelState {
    pub fn new(snr_linear: f64, bandwidth_hz: f64) -> Result<Self> {
        if !(snr_linear.is_finite() && snr_linear >= 0.0) {
            return Err(invalid("SNR must be finite and nonnegative"));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(invalid("bandwidth must be positive"));
        }
        Ok(ChannelState { snr_linear, bandwidth_hz })
    }

    pub fn from_db(snr_db: f64, bandwidth_hz: f64) -> Result<Self> {
        Self::new(db_to_linear(snr_db), bandwidth_hz)
    }

    pub fn snr_linear(&self) -> f64 {
        self.snr_linear
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// `C = B log2(1 + snr)` in bits per second.
pub fn capacity(ch: &ChannelState) -> f64 {
    ch.bandwidth_hz * libm::log1p(ch.snr_linear) / core::f64::consts::LN_2
}

/// Seconds to carry `rate_bits` at capacity.
pub fn latency(rate_bits: f64, ch: &ChannelState) -> Result<f64> {
    if !(rate_bits.is_finite() && rate_bits >= 0.0) {
        return Err(invalid("rate must be finite and nonnegative"));
    }
    if rate_bits == 0.0 {
        return Ok(0.0);
    }
    let c = capacity(ch);
    if c == 0.0 {
        return Err(Error::ZeroCapacity { bits: rate_bits });
    }
    Ok(rate_bits / c)
}

/// Bits deliverable within `t_max` seconds.
pub fn bit_budget(ch: &ChannelState, t_max: f64) -> Result<f64> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(invalid("latency bound must be finite and nonnegative"));
    }
    Ok(capacity(ch) * t_max)
}
