use super::deconv::{deconvolve_mle, DeconvConfig, RecoveredDensity};
use super::{CiMethod, CiResult};
use crate::error::{domain, DpError, Result};
use crate::mechanisms::DpBootstrapOutput;
use crate::normal;
use serde::{Deserialize, Serialize};
use std::f64::consts::E;

/// Lower bound on `n * mu^2 * sigma_x^2` for the noisy bootstrap variance to
/// carry usable signal: `144 * (1 - 1/e)`.
pub const SNR_BOUND: f64 = 144.0 * (1.0 - 1.0 / E);

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("confidence level {level} must lie in (0, 1)")))
    }
}

pub fn percentile_ci(density: &RecoveredDensity, level: f64) -> Result<CiResult> {
    check_level(level)?;
    let tail = (1.0 - level) / 2.0;
    Ok(CiResult {
        method: CiMethod::Percentile,
        level,
        lower: density.quantile(tail),
        upper: density.quantile(1.0 - tail),
        flags: vec![],
    })
}

/// Noise-corrected first and second moments of `x` from `y = x + N(0, sigma2)`.
pub fn moment_estimates(y: &[f64], sigma2: f64) -> Result<(f64, f64)> {
    if y.is_empty() {
        return Err(DpError::InsufficientData("moment estimates need at least one value".into()));
    }
    if !(sigma2 >= 0.0) {
        return Err(domain("noise variance must be nonnegative"));
    }
    let b = y.len() as f64;
    let m1 = y.iter().sum::<f64>() / b;
    let m2 = y.iter().map(|v| v * v).sum::<f64>() / b - sigma2;
    Ok((m1, m2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub point: f64,
    pub se: f64,
    /// The noise correction drove the variance estimate below zero.
    pub clamped: bool,
}

fn sample_variance(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64
}

fn need_b(out: &DpBootstrapOutput, min: usize) -> Result<()> {
    if out.estimates.len() < min {
        return Err(DpError::InsufficientData(format!(
            "need at least {min} bootstrap estimates, got {}",
            out.estimates.len()
        )));
    }
    if out.meta.n < 2 {
        return Err(DpError::InsufficientData("dataset size must be at least 2".into()));
    }
    Ok(())
}

/// Mean of the noisy estimates and its standard error, with the injected
/// noise subtracted from the bootstrap variance.
pub fn estimate_with_se(out: &DpBootstrapOutput) -> Result<PointEstimate> {
    need_b(out, 2)?;
    let b = out.estimates.len() as f64;
    let n = out.meta.n as f64;
    let point = out.estimates.iter().sum::<f64>() / b;
    let s2 = sample_variance(&out.estimates, point);
    let r = n / (n - 1.0);
    let var = (r + 1.0 / b) * s2 - r * out.sigma2;
    Ok(PointEstimate { point, se: var.max(0.0).sqrt(), clamped: var <= 0.0 })
}

pub fn standard_ci(out: &DpBootstrapOutput, level: f64) -> Result<CiResult> {
    check_level(level)?;
    let est = estimate_with_se(out)?;
    let z = normal::quantile(1.0 - (1.0 - level) / 2.0);
    let mut flags = vec![];
    if est.clamped {
        flags.push("se_clamped".to_string());
    }
    Ok(CiResult {
        method: CiMethod::Standard,
        level,
        lower: est.point - z * est.se,
        upper: est.point + z * est.se,
        flags,
    })
}

/// `n * mu^2 * sigma_x^2 >= 144 (1 - 1/e)`.
pub fn snr_feasible(n: usize, mu: f64, sigma_x2: f64) -> bool {
    n as f64 * mu * mu * sigma_x2 >= SNR_BOUND
}

/// t interval whose degrees of freedom account for the noise in the variance
/// estimate. Falls back to the deconvolved percentile interval when the
/// noise-corrected data variance is not positive.
pub fn t_ci_adjusted(out: &DpBootstrapOutput, level: f64, cfg: &DeconvConfig) -> Result<CiResult> {
    check_level(level)?;
    need_b(out, 3)?;
    let n = out.meta.n as f64;
    let b = out.estimates.len() as f64;
    let est = estimate_with_se(out)?;
    let s2 = sample_variance(&out.estimates, est.point);
    let sigma_x2 = n * n / (n - 1.0) * (s2 - out.sigma2);
    if !(sigma_x2 > 0.0) || est.clamped {
        let density = deconvolve_mle(&out.estimates, out.sigma2, cfg)?;
        let mut ci = percentile_ci(&density, level)?;
        ci.flags = vec!["infeasible_snr".into(), "percentile_fallback".into()];
        return Ok(ci);
    }
    let df = (sigma_x2 / (n * s2)).powi(2) * (b - 1.0);
    let t = normal::t_quantile(1.0 - (1.0 - level) / 2.0, df);
    let mut flags = vec![];
    if out.meta.mu.is_finite() && !snr_feasible(out.meta.n, out.meta.mu, sigma_x2) {
        flags.push("below_snr_bound".to_string());
    }
    Ok(CiResult {
        method: CiMethod::TAdjusted,
        level,
        lower: est.point - t * est.se,
        upper: est.point + t * est.se,
        flags,
    })
}

/// Largest `B` keeping the bootstrap variance above the noise variance, but at
/// least `ceil(2 / alpha)`.
pub fn choose_b(n: usize, mu: f64, sigma_x2: f64, alpha: f64) -> Result<usize> {
    if n < 2 || !(mu > 0.0) || !(sigma_x2 >= 0.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("choose_b needs n >= 2, mu > 0, sigma_x2 >= 0 and alpha in (0, 1)"));
    }
    let floor_b = (2.0 / alpha - 1e-9).ceil() as usize;
    let snr_b = ((n - 1) as f64 * sigma_x2 * mu * mu / (2.0 - 2.0 / E)).floor();
    if snr_b.is_finite() && snr_b > floor_b as f64 {
        Ok(snr_b as usize)
    } else {
        Ok(floor_b)
    }
}
