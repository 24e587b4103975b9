//! Gaussian scale mixture sampling, scale estimation and coder profiles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::tensor::{FeatureTensor, ScaleField, ScalingField, Tensor3, THETA_FLOOR};

/// Draws `y = theta * u` with `u` i.i.d. standard normal, in flat order.
pub fn sample_gsm_features(theta: &ScaleField, seed: u64) -> FeatureTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    theta.tensor().map(|t| {
        let u: f64 = StandardNormal.sample(&mut rng);
        t * u
    })
}

fn reflect(p: isize, n: usize) -> usize {
    let n = n as isize;
    let q = p.rem_euclid(2 * n);
    (if q < n { q } else { 2 * n - 1 - q }) as usize
}

/// Windowed root-mean-square of each channel, floored at [`THETA_FLOOR`].
pub fn estimate_scale_field(features: &FeatureTensor, window: usize) -> Result<ScaleField> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(invalid("scale window must be odd and positive"));
    }
    features.check_finite()?;
    let d = features.dims();
    let r = (window / 2) as isize;
    let area = (window * window) as f64;
    let out = Tensor3::from_fn(d, |i, j, c| {
        let mut acc = 0.0;
        for di in -r..=r {
            for dj in -r..=r {
                let v = features.get(reflect(i as isize + di, d.width), reflect(j as isize + dj, d.height), c);
                acc += v * v;
            }
        }
        libm::sqrt(acc / area)
    });
    ScaleField::new(out)
}

/// Stand-in for one trained coder: a uniform shrinkage of the scale field.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderProfile {
    pub id: u16,
    pub shrink_ratio: f64,
    pub nominal_psnr_db: f64,
    pub description: String,
}

impl CoderProfile {
    pub fn is_reference(&self) -> bool {
        self.shrink_ratio == 1.0
    }
}

/// `theta_c = max(THETA_FLOOR, r * theta_r)`.
pub fn apply_coder_profile(theta_r: &ScaleField, profile: &CoderProfile) -> Result<ScaleField> {
    let r = profile.shrink_ratio;
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("shrink ratio {r} outside (0, 1]")));
    }
    ScaleField::new(theta_r.tensor().map(|t| (r * t).max(THETA_FLOOR)))
}

pub fn compute_scaling_field(theta_c: &ScaleField, theta_r: &ScaleField) -> Result<ScalingField> {
    ScalingField::from_ratio(theta_c, theta_r)
}

/// Profiles ordered by nominal PSNR, best quality first.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    profiles: Vec<CoderProfile>,
}

// (id, r, nominal PSNR in dB) measured on the seeded synthetic scene set by
// the `calibrate_profiles` example of gvif-sim.
const DEFAULT_PROFILES: [(u16, f64, f64); 20] = [
    (0, 1.0, 58.99),
    (1, 0.12, 43.82),
    (2, 0.09776, 42.61),
    (3, 0.07965, 41.46),
    (4, 0.06489, 40.37),
    (5, 0.05286, 39.34),
    (6, 0.04307, 38.37),
    (7, 0.03509, 37.47),
    (8, 0.02859, 36.68),
    (9, 0.02329, 35.90),
    (10, 0.01897, 35.16),
    (11, 0.01546, 34.39),
    (12, 0.01259, 33.58),
    (13, 0.01026, 32.70),
    (14, 0.008359, 31.92),
    (15, 0.00681, 31.01),
    (16, 0.005548, 30.19),
    (17, 0.00452, 29.03),
    (18, 0.003682, 27.27),
    (19, 0.003, 25.76),
];

impl ProfileTable {
    /// Sorts by nominal PSNR (descending) and checks the table rules.
    pub fn new(mut profiles: Vec<CoderProfile>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(invalid("profile table is empty"));
        }
        for p in &profiles {
            if !(p.shrink_ratio > 0.0 && p.shrink_ratio <= 1.0) {
                return Err(invalid(format!("profile {} has shrink ratio outside (0, 1]", p.id)));
            }
            if !p.nominal_psnr_db.is_finite() {
                return Err(invalid(format!("profile {} has non-finite PSNR", p.id)));
            }
        }
        if profiles.iter().filter(|p| p.is_reference()).count() > 1 {
            return Err(invalid("only one reference profile (r = 1) is allowed"));
        }
        profiles.sort_by(|a, b| b.nominal_psnr_db.total_cmp(&a.nominal_psnr_db).then(a.id.cmp(&b.id)));
        let mut ids: Vec<u16> = profiles.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("duplicate profile id"));
        }
        Ok(ProfileTable { profiles })
    }

    /// The reference profile plus 19 lossy profiles.
    pub fn default_table() -> Self {
        let profiles = DEFAULT_PROFILES
            .iter()
            .map(|&(id, r, psnr)| CoderProfile {
                id,
                shrink_ratio: r,
                nominal_psnr_db: psnr,
                description: if r == 1.0 { "reference".into() } else { format!("lossy-{id:02}") },
            })
            .collect();
        ProfileTable::new(profiles).expect("built-in profile table is valid")
    }

    pub fn profiles(&self) -> &[CoderProfile] {
        &self.profiles
    }

    pub fn get(&self, id: u16) -> Option<&CoderProfile> {
        self.profiles.iter().find(|p| p.id == id)
    }

    pub fn reference(&self) -> Option<&CoderProfile> {
        self.profiles.iter().find(|p| p.is_reference())
    }

    /// Lossy profiles only.
    pub fn lossy(&self) -> impl Iterator<Item = &CoderProfile> {
        self.profiles.iter().filter(|p| !p.is_reference())
    }
}
