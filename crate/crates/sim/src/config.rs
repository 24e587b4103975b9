//! Run configuration, loadable from `key = value` text.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use gvif_core::channel::DEFAULT_BANDWIDTH_HZ;
use gvif_core::metric::HvsParams;
use gvif_core::optimizer::OptimizerConfig;
use gvif_core::transform::{Basis, ExtractorConfig};

use crate::error::{io_err, Result, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub extractor: ExtractorConfig,
    pub gamma2: f64,
    pub optimizer: OptimizerConfig,
    pub bandwidth_hz: f64,
    /// Count the mask stream toward the rate.
    pub include_mask: bool,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            extractor: ExtractorConfig::default(),
            gamma2: HvsParams::default().gamma2(),
            optimizer: OptimizerConfig::default(),
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            include_mask: false,
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| SimError::Config { line, detail: format!("invalid value {value:?} for {key}") })
}

impl SimConfig {
    pub fn hvs(&self) -> Result<HvsParams> {
        Ok(HvsParams::new(self.gamma2)?)
    }

    /// Sets one key; `line` is only used in error messages.
    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let opt = &mut self.optimizer;
        match key {
            "block_size" => self.extractor.block_size = parse_value(line, key, value)?,
            "scale_window" => self.extractor.scale_window = parse_value(line, key, value)?,
            "basis" => {
                self.extractor.basis = match value {
                    "dct" => Basis::Dct,
                    "wht" | "walsh_hadamard" => Basis::WalshHadamard,
                    _ => return Err(SimError::Config { line, detail: format!("unknown basis {value:?}") }),
                }
            }
            "gamma2" => self.gamma2 = parse_value(line, key, value)?,
            "penalty" => opt.penalty = parse_value(line, key, value)?,
            "smoothing" => opt.smoothing = parse_value(line, key, value)?,
            "step" => opt.step = parse_value(line, key, value)?,
            "alpha_th" => opt.alpha_th = parse_value(line, key, value)?,
            "alpha0" => opt.alpha0 = parse_value(line, key, value)?,
            "batch_size" => opt.batch_size = parse_value(line, key, value)?,
            "tolerance" => opt.tolerance = parse_value(line, key, value)?,
            "patience" => opt.patience = parse_value(line, key, value)?,
            "max_iters" => opt.max_iters = parse_value(line, key, value)?,
            "refine_boundary" => opt.refine_boundary = parse_value(line, key, value)?,
            "t_max_ms" => opt.t_max = parse_value::<f64>(line, key, value)? / 1e3,
            "d0_psnr" => opt.d0_psnr_db = parse_value(line, key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_value(line, key, value)?,
            "include_mask" => self.include_mask = parse_value(line, key, value)?,
            "seed" => self.seed = parse_value(line, key, value)?,
            _ => return Err(SimError::Config { line, detail: format!("unknown key {key:?}") }),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config { line: n + 1, detail: "expected key = value".into() })?;
            self.set(n + 1, key.trim(), value.trim())?;
        }
        self.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = SimConfig::default();
        cfg.apply(&fs::read_to_string(path).map_err(io_err(path))?)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.extractor.validate()?;
        self.optimizer.validate()?;
        self.hvs()?;
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(SimError::Config { line: 0, detail: "bandwidth_hz must be positive".into() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let mut cfg = SimConfig::default();
        cfg.apply("# run\nblock_size = 4\nbasis = wht\nt_max_ms = 50 # latency\ninclude_mask = true\n").unwrap();
        assert_eq!(cfg.extractor.block_size, 4);
        assert_eq!(cfg.extractor.basis, Basis::WalshHadamard);
        assert_eq!(cfg.optimizer.t_max, 0.05);
        assert!(cfg.include_mask);
    }

    #[test]
    fn errors_name_the_line() {
        let mut cfg = SimConfig::default();
        match cfg.apply("gamma2 = 0.1\nwat = 3\n") {
            Err(SimError::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(SimConfig::default().apply("block_size = 3\n").is_err());
        assert!(SimConfig::default().apply("gamma2\n").is_err());
    }
}
