//! Joint choice of coder profile and filtering threshold under a latency
//! budget: a penalized zero-order descent on the threshold for each
//! admissible profile, then selection by expected GVIF.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{bit_budget, ChannelState};
use crate::error::{invalid, Error, Result};
use crate::gsm::CoderProfile;

/// Per-item GVIF and rate as functions of `(profile, alpha)`.
pub trait EvalOracle {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn gvif(&self, profile: &CoderProfile, alpha: f64, item: usize) -> Result<f64>;

    fn bits(&self, profile: &CoderProfile, alpha: f64, item: usize) -> Result<f64>;

    /// `dV/dalpha`, for oracles with a known closed form.
    fn gvif_derivative(&self, _profile: &CoderProfile, _alpha: f64, _item: usize) -> Option<Result<f64>> {
        None
    }

    /// `dB/dalpha`, for oracles with a known closed form.
    fn bits_derivative(&self, _profile: &CoderProfile, _alpha: f64, _item: usize) -> Option<Result<f64>> {
        None
    }
}

type ItemFn<'a> = Box<dyn Fn(&CoderProfile, f64, usize) -> f64 + 'a>;

/// Oracle assembled from closures.
pub struct FnOracle<'a> {
    len: usize,
    gvif: ItemFn<'a>,
    bits: ItemFn<'a>,
    derivatives: Option<(ItemFn<'a>, ItemFn<'a>)>,
}

impl<'a> FnOracle<'a> {
    pub fn new(
        len: usize,
        gvif: impl Fn(&CoderProfile, f64, usize) -> f64 + 'a,
        bits: impl Fn(&CoderProfile, f64, usize) -> f64 + 'a,
    ) -> Self {
        FnOracle { len, gvif: Box::new(gvif), bits: Box::new(bits), derivatives: None }
    }

    pub fn with_derivatives(
        mut self,
        dgvif: impl Fn(&CoderProfile, f64, usize) -> f64 + 'a,
        dbits: impl Fn(&CoderProfile, f64, usize) -> f64 + 'a,
    ) -> Self {
        self.derivatives = Some((Box::new(dgvif), Box::new(dbits)));
        self
    }
}

impl EvalOracle for FnOracle<'_> {
    fn len(&self) -> usize {
        self.len
    }

    fn gvif(&self, profile: &CoderProfile, alpha: f64, item: usize) -> Result<f64> {
        Ok((self.gvif)(profile, alpha, item))
    }

    fn bits(&self, profile: &CoderProfile, alpha: f64, item: usize) -> Result<f64> {
        Ok((self.bits)(profile, alpha, item))
    }

    fn gvif_derivative(&self, profile: &CoderProfile, alpha: f64, item: usize) -> Option<Result<f64>> {
        self.derivatives.as_ref().map(|(dv, _)| Ok(dv(profile, alpha, item)))
    }

    fn bits_derivative(&self, profile: &CoderProfile, alpha: f64, item: usize) -> Option<Result<f64>> {
        self.derivatives.as_ref().map(|(_, db)| Ok(db(profile, alpha, item)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Two-point estimate along one uniform perturbation `m` in `[-1, 1]`.
    ZeroOrder,
    /// Exact derivatives supplied by the oracle.
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Dimensionless weight on the squared excess `K / (C T_max)`.
    pub penalty: f64,
    pub smoothing: f64,
    pub step: f64,
    pub alpha_th: f64,
    pub alpha0: f64,
    /// Latency bound in seconds.
    pub t_max: f64,
    /// Minimum admissible nominal PSNR in dB.
    pub d0_psnr_db: f64,
    pub batch_size: usize,
    pub tolerance: f64,
    /// Consecutive sub-tolerance moves required to stop.
    pub patience: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub gradient: GradientMode,
    /// After descent, also try the smallest budget-feasible threshold and
    /// keep whichever of the two is better.
    pub refine_boundary: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            penalty: 10.0,
            smoothing: 0.01,
            step: 0.05,
            alpha_th: 0.8,
            alpha0: 0.5,
            t_max: 0.02,
            d0_psnr_db: 30.0,
            batch_size: 8,
            tolerance: 1e-3,
            patience: 5,
            max_iters: 200,
            seed: 0,
            gradient: GradientMode::ZeroOrder,
            refine_boundary: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("penalty", self.penalty >= 0.0),
            ("smoothing", self.smoothing > 0.0),
            ("step", self.step > 0.0),
            ("t_max", self.t_max > 0.0),
            ("tolerance", self.tolerance > 0.0),
        ];
        for (name, ok) in positive {
            if !ok {
                return Err(invalid(format!("optimizer {name} out of range")));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha_th) {
            return Err(invalid("alpha_th must lie in [0, 1]"));
        }
        if self.batch_size == 0 || self.max_iters == 0 || self.patience == 0 {
            return Err(invalid("batch size, max_iters and patience must be positive"));
        }
        Ok(())
    }

    fn project(&self, alpha: f64) -> f64 {
        alpha.clamp(0.0, self.alpha_th)
    }
}

/// `-G + p max(0, K)^2` with a raw penalty weight `p`.
pub fn penalty_value(mean_gvif: f64, excess_bits: f64, p: f64) -> f64 {
    let k = excess_bits.max(0.0);
    -mean_gvif + p * k * k
}

/// Effective weight `p = penalty / (C T_max)^2`.
pub fn effective_penalty(budget_bits: f64, cfg: &OptimizerConfig) -> f64 {
    cfg.penalty / (budget_bits * budget_bits)
}

/// `L = -G + p max(0, E[B] - C T_max)^2`.
pub fn penalty_objective(mean_gvif: f64, mean_bits: f64, capacity_bps: f64, cfg: &OptimizerConfig) -> Result<f64> {
    if capacity_bps.is_nan() || capacity_bps <= 0.0 {
        return Err(Error::InfeasibleChannel);
    }
    let budget = capacity_bps * cfg.t_max;
    Ok(penalty_value(mean_gvif, mean_bits - budget, effective_penalty(budget, cfg)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientEstimate {
    pub mean_gvif: f64,
    pub excess_bits: f64,
    pub objective: f64,
    pub grad_gvif: f64,
    pub grad_bits: f64,
    pub grad_objective: f64,
    pub perturbation: f64,
}

fn batch_mean(batch: &[usize], mut f: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let mut s = 0.0;
    for &i in batch {
        s += f(i)?;
    }
    Ok(s / batch.len() as f64)
}

/// Gradient of the penalized objective at `alpha` over one batch. The
/// perturbation `m` is shared by every item of the batch.
pub fn estimate_gradient(
    alpha: f64,
    batch: &[usize],
    profile: &CoderProfile,
    oracle: &dyn EvalOracle,
    budget_bits: f64,
    cfg: &OptimizerConfig,
    rng: &mut impl Rng,
) -> Result<GradientEstimate> {
    if batch.is_empty() {
        return Err(invalid("empty batch"));
    }
    if cfg.smoothing.is_nan() || cfg.smoothing <= 0.0 {
        return Err(invalid("smoothing must be positive"));
    }
    let g = batch_mean(batch, |i| oracle.gvif(profile, alpha, i))?;
    let b = batch_mean(batch, |i| oracle.bits(profile, alpha, i))?;
    let (grad_gvif, grad_bits, m) = match cfg.gradient {
        GradientMode::ZeroOrder => {
            let m: f64 = rng.random_range(-1.0..=1.0);
            let shifted = alpha + cfg.smoothing * m;
            let g2 = batch_mean(batch, |i| oracle.gvif(profile, shifted, i))?;
            let b2 = batch_mean(batch, |i| oracle.bits(profile, shifted, i))?;
            ((g2 - g) / cfg.smoothing * m, (b2 - b) / cfg.smoothing * m, m)
        }
        GradientMode::Analytic => {
            let missing = || Error::Oracle("oracle has no analytic derivatives".into());
            let dg = batch_mean(batch, |i| oracle.gvif_derivative(profile, alpha, i).ok_or_else(missing)?)?;
            let db = batch_mean(batch, |i| oracle.bits_derivative(profile, alpha, i).ok_or_else(missing)?)?;
            (dg, db, 0.0)
        }
    };
    let p = effective_penalty(budget_bits, cfg);
    let excess = b - budget_bits;
    let grad_objective = -grad_gvif + 2.0 * p * excess.max(0.0) * grad_bits;
    Ok(GradientEstimate {
        mean_gvif: g,
        excess_bits: excess,
        objective: penalty_value(g, excess, p),
        grad_gvif,
        grad_bits,
        grad_objective,
        perturbation: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub t: usize,
    pub alpha: f64,
    pub mean_gvif: f64,
    pub excess_bits: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub alpha_star: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

fn profile_seed(cfg: &OptimizerConfig, profile: &CoderProfile) -> u64 {
    cfg.seed ^ (profile.id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Random batch without replacement (the whole dataset when it is small).
fn draw_batch(n: usize, size: usize, rng: &mut impl Rng, pool: &mut Vec<usize>) -> Vec<usize> {
    pool.clear();
    pool.extend(0..n);
    let k = size.min(n);
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool[..k].to_vec()
}

/// Projected descent `alpha <- P(alpha - eta grad L)` from `alpha0`.
pub fn optimize_threshold(
    profile: &CoderProfile,
    oracle: &dyn EvalOracle,
    ch: &ChannelState,
    cfg: &OptimizerConfig,
) -> Result<ThresholdResult> {
    cfg.validate()?;
    if oracle.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let budget = bit_budget(ch, cfg.t_max)?;
    if budget.is_nan() || budget <= 0.0 {
        return Err(Error::InfeasibleChannel);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile_seed(cfg, profile));
    let mut pool = Vec::new();
    let mut alpha = cfg.project(cfg.alpha0);
    let mut trace = Vec::new();
    let mut quiet = 0;
    let mut converged = false;
    for t in 0..cfg.max_iters {
        let batch = draw_batch(oracle.len(), cfg.batch_size, &mut rng, &mut pool);
        let est = estimate_gradient(alpha, &batch, profile, oracle, budget, cfg, &mut rng)?;
        trace.push(TraceEntry {
            t,
            alpha,
            mean_gvif: est.mean_gvif,
            excess_bits: est.excess_bits,
            objective: est.objective,
        });
        let next = cfg.project(alpha - cfg.step * est.grad_objective);
        quiet = if (next - alpha).abs() < cfg.tolerance { quiet + 1 } else { 0 };
        alpha = next;
        if quiet >= cfg.patience {
            converged = true;
            break;
        }
    }
    Ok(ThresholdResult { alpha_star: alpha, iterations: trace.len(), converged, trace })
}

/// Dataset means of GVIF and bits.
pub fn expected_values(oracle: &dyn EvalOracle, profile: &CoderProfile, alpha: f64) -> Result<(f64, f64)> {
    if oracle.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let all: Vec<usize> = (0..oracle.len()).collect();
    Ok((batch_mean(&all, |i| oracle.gvif(profile, alpha, i))?, batch_mean(&all, |i| oracle.bits(profile, alpha, i))?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOutcome {
    pub profile: CoderProfile,
    /// Threshold returned by the descent.
    pub alpha_descent: f64,
    /// Threshold after boundary refinement.
    pub alpha_star: f64,
    pub expected_gvif: f64,
    pub expected_bits: f64,
    pub iterations: usize,
    /// Whether the expected rate fits the bit budget.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: ProfileOutcome,
    pub budget_bits: f64,
    pub outcomes: Vec<ProfileOutcome>,
}

/// Smallest threshold in `[0, alpha_th]` whose expected rate fits the
/// budget, assuming the rate does not increase with the threshold.
fn budget_boundary(oracle: &dyn EvalOracle, profile: &CoderProfile, budget: f64, cfg: &OptimizerConfig) -> Result<f64> {
    let mean_bits = |a: f64| expected_values(oracle, profile, a).map(|v| v.1);
    if mean_bits(0.0)? <= budget {
        return Ok(0.0);
    }
    if mean_bits(cfg.alpha_th)? > budget {
        return Ok(cfg.alpha_th);
    }
    let (mut a, mut b) = (0.0, cfg.alpha_th);
    while b - a > 1e-6 {
        let mid = 0.5 * (a + b);
        if mean_bits(mid)? <= budget {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

/// Keeps the better of the descent result and the budget boundary: a
/// feasible point beats an infeasible one, then higher expected GVIF, then
/// fewer bits.
fn refine(
    oracle: &dyn EvalOracle,
    profile: &CoderProfile,
    alpha_descent: f64,
    budget: f64,
    cfg: &OptimizerConfig,
) -> Result<(f64, f64, f64)> {
    let (v0, b0) = expected_values(oracle, profile, alpha_descent)?;
    if !cfg.refine_boundary {
        return Ok((alpha_descent, v0, b0));
    }
    let boundary = budget_boundary(oracle, profile, budget, cfg)?;
    let (v1, b1) = expected_values(oracle, profile, boundary)?;
    let better = match (b1 <= budget, b0 <= budget) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => v1 > v0,
        (false, false) => b1 < b0,
    };
    Ok(if better { (boundary, v1, b1) } else { (alpha_descent, v0, b0) })
}

pub fn select_profile(
    profiles: &[CoderProfile],
    oracle: &dyn EvalOracle,
    ch: &ChannelState,
    cfg: &OptimizerConfig,
) -> Result<Selection> {
    cfg.validate()?;
    let admissible: Vec<&CoderProfile> = profiles.iter().filter(|p| p.nominal_psnr_db >= cfg.d0_psnr_db).collect();
    if admissible.is_empty() {
        return Err(Error::NoFeasibleProfile { d0_psnr_db: cfg.d0_psnr_db });
    }
    let budget = bit_budget(ch, cfg.t_max)?;
    let mut outcomes = Vec::with_capacity(admissible.len());
    for profile in admissible {
        let run = optimize_threshold(profile, oracle, ch, cfg)?;
        let (alpha_star, expected_gvif, expected_bits) = refine(oracle, profile, run.alpha_star, budget, cfg)?;
        outcomes.push(ProfileOutcome {
            profile: profile.clone(),
            alpha_descent: run.alpha_star,
            alpha_star,
            expected_gvif,
            expected_bits,
            iterations: run.iterations,
            feasible: expected_bits <= budget,
        });
    }
    let mut best: Option<&ProfileOutcome> = None;
    for o in outcomes.iter().filter(|o| o.feasible) {
        best = match best {
            None => Some(o),
            Some(b) if o.expected_gvif > b.expected_gvif + 1e-12 => Some(o),
            Some(b)
                if (o.expected_gvif - b.expected_gvif).abs() <= 1e-12
                    && o.profile.shrink_ratio < b.profile.shrink_ratio =>
            {
                Some(o)
            }
            keep => keep,
        };
    }
    let chosen = match best {
        Some(b) => b.clone(),
        None => outcomes
            .iter()
            .min_by(|a, b| a.expected_bits.total_cmp(&b.expected_bits))
            .cloned()
            .expect("at least one admissible profile"),
    };
    Ok(Selection { chosen, budget_bits: budget, outcomes })
}
