//! Text and CSV renderings of the tool's results.

use gvif_core::optimizer::Selection;

use crate::appendix::CorrelationReport;
use crate::sweep::SweepRow;

/// GVIF of one coded image.
#[derive(Debug, Clone, PartialEq)]
pub struct GvifRow {
    pub image_id: String,
    pub profile_id: u16,
    pub alpha: f64,
    pub gvif: f64,
    pub numerator_bits: f64,
    pub denominator_bits: f64,
    /// Channel averages of the two sums.
    pub numerator_bits_per_channel: f64,
    pub denominator_bits_per_channel: f64,
    /// `None` when nothing was selected.
    pub mask_psnr_db: Option<f64>,
    pub rate_bits: u64,
}

pub const GVIF_CSV_HEADER: &str =
    "image_id,profile_id,alpha,gvif,numerator_bits,denominator_bits,mask_psnr_db,rate_bits";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |v| v.to_string())
}

impl GvifRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.image_id,
            self.profile_id,
            self.alpha,
            self.gvif,
            self.numerator_bits,
            self.denominator_bits,
            opt(self.mask_psnr_db),
            self.rate_bits
        )
    }

    pub fn key_values(&self) -> String {
        format!(
            "image_id={}\nprofile_id={}\nalpha={}\ngvif={}\nnumerator_bits={}\ndenominator_bits={}\n\
             numerator_bits_per_channel={}\ndenominator_bits_per_channel={}\nmask_psnr_db={}\nrate_bits={}\n",
            self.image_id,
            self.profile_id,
            self.alpha,
            self.gvif,
            self.numerator_bits,
            self.denominator_bits,
            self.numerator_bits_per_channel,
            self.denominator_bits_per_channel,
            opt(self.mask_psnr_db),
            self.rate_bits
        )
    }
}

pub fn gvif_csv(rows: &[GvifRow]) -> String {
    let mut out = format!("{GVIF_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

pub const OPTIMIZE_CSV_HEADER: &str = "profile_id,alpha_star,expected_gvif,expected_bits,iterations,feasible";

pub fn optimize_csv(selection: &Selection) -> String {
    let mut out = format!("{OPTIMIZE_CSV_HEADER}\n");
    for o in &selection.outcomes {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.profile.id, o.alpha_star, o.expected_gvif, o.expected_bits, o.iterations, o.feasible
        ));
    }
    out
}

pub const SWEEP_CSV_HEADER: &str =
    "scheme,snr_db,profile_id,alpha,mean_gvif,mean_bits,latency_s,mean_mask_psnr_db,feasible,error";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.scheme.name(),
            r.snr_db,
            r.profile_id.map_or_else(String::new, |id| id.to_string()),
            r.alpha,
            r.mean_gvif,
            r.mean_bits,
            r.latency_s,
            r.mean_mask_psnr_db,
            r.feasible,
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        ));
    }
    out
}

pub fn correlation_key_values(report: &CorrelationReport) -> String {
    let mut out = format!("samples={}\n", report.samples);
    for (name, p) in [("inside", &report.inside), ("outside", &report.outside)] {
        if let Some(p) = p {
            out.push_str(&format!("{name}_pearson={}\n{name}_pairs={}\n", p.value(), p.count()));
        }
    }
    out
}

/// `i,j,pearson` per feature-grid position.
pub fn correlation_map_csv(report: &CorrelationReport) -> String {
    let m = &report.per_position;
    let mut out = String::from("i,j,pearson\n");
    for i in 0..m.width() {
        for j in 0..m.height() {
            out.push_str(&format!("{i},{j},{}\n", m.get(i, j)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Scheme;

    #[test]
    fn csv_shapes() {
        let row = GvifRow {
            image_id: "scene_000".into(),
            profile_id: 3,
            alpha: 0.5,
            gvif: 0.25,
            numerator_bits: 10.0,
            denominator_bits: 40.0,
            numerator_bits_per_channel: 1.0,
            denominator_bits_per_channel: 4.0,
            mask_psnr_db: None,
            rate_bits: 1234,
        };
        assert_eq!(row.csv(), "scene_000,3,0.5,0.25,10,40,NaN,1234");
        assert!(row.key_values().contains("denominator_bits_per_channel=4\n"));
        let s = SweepRow {
            scheme: Scheme::NoFilter,
            snr_db: -3.0,
            profile_id: None,
            alpha: 0.0,
            mean_gvif: 0.0,
            mean_bits: 1.0,
            latency_s: 2.0,
            mean_mask_psnr_db: f64::NAN,
            feasible: false,
            error: Some("a, b".into()),
        };
        assert_eq!(sweep_csv(&[s]).lines().nth(1).unwrap(), "no_filter,-3,,0,0,1,2,NaN,false,a; b");
    }
}
