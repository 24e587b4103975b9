//! Class models: a GVTF tensor of feature maps plus a text file with one
//! `label,w_1,...,w_Cf` line per class.

use std::fs;
use std::path::Path;

use gvif_core::filter::ClassModel;

use super::gvtf::{self, GvtfTensor};
use crate::error::{format_err, io_err, Result};

pub fn parse_weights(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let label = parts.next().unwrap_or_default().trim().to_string();
        let w = parts
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format_err("class weights", format!("line {}: {e}", n + 1)))?;
        labels.push(label);
        weights.push(w);
    }
    Ok((labels, weights))
}

pub fn render_weights(model: &ClassModel) -> String {
    let mut out = String::new();
    for (label, w) in model.labels().iter().zip(model.weights()) {
        out.push_str(label);
        for v in w {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn read(maps: &Path, weights: &Path) -> Result<ClassModel> {
    let maps = gvtf::read(maps)?.into_f64();
    let (labels, weights) = parse_weights(&fs::read_to_string(weights).map_err(io_err(weights))?)?;
    Ok(ClassModel::new(maps, weights, labels)?)
}

pub fn write(maps: &Path, weights: &Path, model: &ClassModel) -> Result<()> {
    gvtf::write(maps, &GvtfTensor::F32(model.feature_maps().clone()))?;
    fs::write(weights, render_weights(model)).map_err(io_err(weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_roundtrip() {
        let text = "# classes\ncat,1,0.5\ndog,-2,0\n";
        let (labels, w) = parse_weights(text).unwrap();
        assert_eq!(labels, ["cat", "dog"]);
        assert_eq!(w, vec![vec![1.0, 0.5], vec![-2.0, 0.0]]);
        assert!(parse_weights("cat,x\n").is_err());
    }
}
