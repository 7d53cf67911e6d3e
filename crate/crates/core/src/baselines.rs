//! Parametric-bootstrap private intervals: NoisyVar for a mean and NoisyCov
//! for a covariance.

use crate::error::{domain, DpError, Result};
use crate::inference::{CiMethod, CiResult};
use crate::mechanisms::{replicate_rng, Dataset};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Variance of the per-release Gaussian noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `k * B * delta^2 / mu^2`, with the bootstrap count as a multiplier.
    ScaledByB,
    /// `k * delta^2 / mu^2`: `k` releases composing to exactly `mu`-GDP.
    #[default]
    BudgetSplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub mu: f64,
    pub nsim: usize,
    pub level: f64,
    pub noise_mode: NoiseMode,
    /// Only read in [`NoiseMode::ScaledByB`].
    #[serde(rename = "B")]
    pub b: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { mu: 1.0, nsim: 2000, level: 0.9, noise_mode: NoiseMode::BudgetSplit, b: 1 }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(domain("mu must be positive"));
        }
        if self.nsim < 100 {
            return Err(domain(format!("nsim = {} must be at least 100", self.nsim)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(domain(format!("level {} must lie in (0, 1)", self.level)));
        }
        if self.b < 1 {
            return Err(domain("B must be at least 1"));
        }
        Ok(())
    }

    /// Noise standard deviation for one of `k` releases with sensitivity `delta`.
    pub fn noise_sd(&self, k: usize, delta: f64) -> f64 {
        let mult = match self.noise_mode {
            NoiseMode::ScaledByB => (k * self.b) as f64,
            NoiseMode::BudgetSplit => k as f64,
        };
        mult.sqrt() * delta / self.mu
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (R's type 7). `xs` must be sorted.
pub fn quantile_type7(xs: &[f64], q: f64) -> f64 {
    let h = (xs.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

fn margin(mut sims: Vec<f64>, level: f64) -> f64 {
    sims.sort_by(f64::total_cmp);
    let a = 1.0 - level;
    (quantile_type7(&sims, 1.0 - a / 2.0) - quantile_type7(&sims, a / 2.0)) / 2.0
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn noise<R: RngCore + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    sd * rng.sample::<f64, _>(StandardNormal)
}

fn require_columns(data: &Dataset, stat: &'static str, need: usize) -> Result<()> {
    if data.columns().len() != need {
        return Err(DpError::Arity { stat, need, have: data.columns().len() });
    }
    Ok(())
}

/// Private interval for the mean of one bounded column.
pub fn noisyvar_ci<R: RngCore + ?Sized>(data: &Dataset, cfg: &BaselineConfig, rng: &mut R) -> Result<CiResult> {
    cfg.validate()?;
    require_columns(data, "noisyvar", 1)?;
    let n = data.n();
    let nf = n as f64;
    let x = &data.columns()[0];
    let (lo, hi) = data.bounds()[0];
    let range = hi - lo;
    let sd_mean = cfg.noise_sd(2, range / nf);
    let sd_var = cfg.noise_sd(2, range * range / nf);

    let xbar = mean(x);
    let m1 = xbar + noise(rng, sd_mean);
    let s2 = x.iter().map(|v| (v - xbar) * (v - xbar)).sum::<f64>() / (nf - 1.0);
    let m2 = (s2 + noise(rng, sd_var)).max(0.0);
    let sd_data = m2.sqrt();

    let base = rng.next_u64();
    let sims: Vec<f64> = (0..cfg.nsim)
        .into_par_iter()
        .map(|i| {
            let mut r = replicate_rng(base, i as u64);
            let mut sum = 0.0;
            for _ in 0..n {
                let v = m1 + sd_data * r.sample::<f64, _>(StandardNormal);
                sum += v.clamp(lo, hi);
            }
            sum / nf + noise(&mut r, sd_mean)
        })
        .collect();
    let moe = margin(sims, cfg.level);
    Ok(CiResult { method: CiMethod::NoisyVar, level: cfg.level, lower: m1 - moe, upper: m1 + moe, flags: vec![] })
}

/// The three noisy second-moment releases behind [`noisycov_ci`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovRelease {
    pub var_x: f64,
    pub var_y: f64,
    /// Covariance clamped to `[-sqrt(var_x var_y), sqrt(var_x var_y)]`.
    pub cov: f64,
    pub noise_sd: f64,
}

fn sample_cov(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn noisy_cov_release<R: RngCore + ?Sized>(data: &Dataset, cfg: &BaselineConfig, rng: &mut R) -> Result<CovRelease> {
    cfg.validate()?;
    require_columns(data, "noisycov", 2)?;
    let nf = data.n() as f64;
    let (x, y) = (&data.columns()[0], &data.columns()[1]);
    let rx = data.bounds()[0].1 - data.bounds()[0].0;
    let ry = data.bounds()[1].1 - data.bounds()[1].0;
    let sd_x = cfg.noise_sd(3, rx * rx / nf);
    let sd_y = cfg.noise_sd(3, ry * ry / nf);
    let sd_xy = cfg.noise_sd(3, rx * ry / nf);
    let var_x = (sample_cov(x, x) + noise(rng, sd_x)).max(0.0);
    let var_y = (sample_cov(y, y) + noise(rng, sd_y)).max(0.0);
    let cap = (var_x * var_y).sqrt();
    let cov = (sample_cov(x, y) + noise(rng, sd_xy)).clamp(-cap, cap);
    Ok(CovRelease { var_x, var_y, cov, noise_sd: sd_xy })
}

/// Private interval for the covariance of two bounded columns.
pub fn noisycov_ci<R: RngCore + ?Sized>(data: &Dataset, cfg: &BaselineConfig, rng: &mut R) -> Result<CiResult> {
    let rel = noisy_cov_release(data, cfg, rng)?;
    let n = data.n();
    let nf = n as f64;
    // Cholesky factor of [[var_x, cov], [cov, var_y]]
    let l11 = rel.var_x.sqrt();
    let l21 = if l11 > 0.0 { rel.cov / l11 } else { 0.0 };
    let l22 = (rel.var_y - l21 * l21).max(0.0).sqrt();

    let base = rng.next_u64();
    let sims: Vec<f64> = (0..cfg.nsim)
        .into_par_iter()
        .map(|i| {
            let mut r = replicate_rng(base, i as u64);
            let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
            for _ in 0..n {
                let z1: f64 = r.sample(StandardNormal);
                let z2: f64 = r.sample(StandardNormal);
                let (a, b) = (l11 * z1, l21 * z1 + l22 * z2);
                sx += a;
                sy += b;
                sxy += a * b;
            }
            (sxy - sx * sy / nf) / (nf - 1.0) + noise(&mut r, rel.noise_sd)
        })
        .collect();
    let moe = margin(sims, cfg.level);
    Ok(CiResult {
        method: CiMethod::NoisyCov,
        level: cfg.level,
        lower: rel.cov - moe,
        upper: rel.cov + moe,
        flags: vec![],
    })
}
