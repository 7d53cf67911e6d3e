//! One call per interval method, shared by the simulation and dataset runs.

use crate::config::Method;
use crate::error::Result;
use dpboot_core::baselines::{noisycov_ci, noisyvar_ci, BaselineConfig, NoiseMode};
use dpboot_core::inference::{
    deconvolve_mle, percentile_ci, standard_ci, t_ci_adjusted, CiResult, DeconvConfig,
    RecoveredDensity,
};
use dpboot_core::mechanisms::{
    bootstrap_estimates, dp_bootstrap, mix_seed, DpBootstrapOutput, Dataset, StatisticId,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Step distribution of raw estimates, on their distinct values.
pub fn empirical_density(xs: &[f64]) -> Result<RecoveredDensity> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut support: Vec<f64> = Vec::new();
    let mut mass: Vec<f64> = Vec::new();
    for v in sorted {
        match support.last() {
            Some(&last) if last == v => *mass.last_mut().unwrap() += 1.0,
            _ => {
                support.push(v);
                mass.push(1.0);
            }
        }
    }
    Ok(RecoveredDensity::new(support, mass)?)
}

/// Sampling distribution recovered from private bootstrap output. Noise-free
/// output (infinite budget) skips deconvolution.
pub fn recovered_distribution(out: &DpBootstrapOutput, deconv: &DeconvConfig) -> Result<RecoveredDensity> {
    if out.sigma2 == 0.0 {
        empirical_density(&out.estimates)
    } else {
        Ok(deconvolve_mle(&out.estimates, out.sigma2, deconv)?)
    }
}

/// Inputs shared by every method for one dataset.
#[derive(Clone, Debug)]
pub struct MethodInputs<'a> {
    pub data: &'a Dataset,
    pub statistic: StatisticId,
    pub mu: f64,
    pub b: usize,
    pub seed: u64,
    pub nsim: usize,
    pub noise_mode: NoiseMode,
    pub deconv: DeconvConfig,
}

const TAG_BOOT: u64 = 1;
const TAG_DP: u64 = 2;
const TAG_BASELINE: u64 = 3;

/// Output of one method on one dataset.
#[derive(Clone, Debug)]
pub struct MethodRun {
    /// Per requested level.
    pub intervals: Vec<CiResult>,
    /// Recovered sampling distribution, when the method has one.
    pub density: Option<RecoveredDensity>,
    pub dp_output: Option<DpBootstrapOutput>,
}

pub fn baseline_config(inp: &MethodInputs<'_>, level: f64) -> BaselineConfig {
    BaselineConfig { mu: inp.mu, nsim: inp.nsim, level, noise_mode: inp.noise_mode, b: inp.b }
}

/// Runs `method` at every level. The private bootstrap output is drawn once
/// per call; baselines make a fresh release per level.
pub fn run_method(method: Method, inp: &MethodInputs<'_>, levels: &[f64]) -> Result<MethodRun> {
    match method {
        Method::Bootstrap => {
            let est = bootstrap_estimates(inp.data, inp.statistic, inp.b, mix_seed(inp.seed, &[TAG_BOOT]))?;
            let density = empirical_density(&est)?;
            let intervals = levels.iter().map(|&l| percentile_ci(&density, l)).collect::<std::result::Result<_, _>>()?;
            Ok(MethodRun { intervals, density: Some(density), dp_output: None })
        }
        Method::DpBootstrap | Method::DpT | Method::DpStandard => {
            let out = dp_bootstrap(inp.data, inp.statistic, inp.mu, inp.b, mix_seed(inp.seed, &[TAG_DP]))?;
            let (intervals, density) = match method {
                Method::DpBootstrap => {
                    let d = recovered_distribution(&out, &inp.deconv)?;
                    let cis = levels.iter().map(|&l| percentile_ci(&d, l)).collect::<std::result::Result<_, _>>()?;
                    (cis, Some(d))
                }
                Method::DpT => {
                    let cis = levels.iter().map(|&l| t_ci_adjusted(&out, l, &inp.deconv)).collect::<std::result::Result<_, _>>()?;
                    (cis, None)
                }
                _ => {
                    let cis = levels.iter().map(|&l| standard_ci(&out, l)).collect::<std::result::Result<_, _>>()?;
                    (cis, None)
                }
            };
            Ok(MethodRun { intervals, density, dp_output: Some(out) })
        }
        Method::NoisyVar | Method::NoisyCov => {
            let mut intervals = Vec::with_capacity(levels.len());
            for (k, &level) in levels.iter().enumerate() {
                let cfg = baseline_config(inp, level);
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(inp.seed, &[TAG_BASELINE, k as u64]));
                let ci = if method == Method::NoisyVar {
                    noisyvar_ci(inp.data, &cfg, &mut rng)?
                } else {
                    noisycov_ci(inp.data, &cfg, &mut rng)?
                };
                intervals.push(ci);
            }
            Ok(MethodRun { intervals, density: None, dp_output: None })
        }
    }
}
