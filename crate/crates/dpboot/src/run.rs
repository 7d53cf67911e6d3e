//! Interval methods applied to one ingested dataset.

use crate::config::Method;
use crate::error::{HarnessError, Result};
use crate::methods::{baseline_config, run_method, MethodInputs};
use dpboot_core::baselines::NoiseMode;
use dpboot_core::inference::{estimate_with_se, CiResult, DeconvConfig};
use dpboot_core::mechanisms::{
    dp_bootstrap_sigma2, mix_seed, statistic_eval, Dataset, Statistic, StatisticId,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub statistic: StatisticId,
    pub mu: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub level: Vec<f64>,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub nsim: usize,
    pub noise_mode: NoiseMode,
    /// Resample the ingested rows with replacement to this size first.
    pub resample: Option<usize>,
    /// Known population value; enables coverage indicators.
    pub truth: Option<f64>,
    #[serde(flatten)]
    pub deconv: DeconvConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            statistic: StatisticId::Mean,
            mu: 1.0,
            b: 100,
            level: vec![0.9],
            methods: vec![],
            seed: 0,
            nsim: 2000,
            noise_mode: NoiseMode::BudgetSplit,
            resample: None,
            truth: None,
            deconv: DeconvConfig::default(),
        }
    }
}

impl RunConfig {
    /// Configured methods, or every method that applies to the statistic.
    pub fn effective_methods(&self) -> Vec<Method> {
        if self.methods.is_empty() {
            Method::ALL.into_iter().filter(|m| m.supports(self.statistic)).collect()
        } else {
            self.methods.clone()
        }
    }
}

/// Per-release noise variance a method injects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseScale {
    pub method: Method,
    pub releases: usize,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub intervals: Vec<CiResult>,
    /// Coverage indicator per interval, when a truth value was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covered: Option<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodFailure {
    pub method: Method,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub dropped_rows: usize,
    pub clamped_values: usize,
    pub statistic: StatisticId,
    pub sample_value: f64,
    pub mu: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub point_estimate: Option<f64>,
    pub standard_error: Option<f64>,
    pub noise: Vec<NoiseScale>,
    pub methods: Vec<MethodReport>,
    pub failures: Vec<MethodFailure>,
}

const TAG_RESAMPLE: u64 = 0x_5a3;

/// Runs every configured method on `data`. `dropped_rows` is carried into
/// the report from ingestion.
pub fn run_dataset(data: &Dataset, dropped_rows: usize, cfg: &RunConfig) -> Result<RunReport> {
    if data.columns().len() != cfg.statistic.arity() {
        return Err(HarnessError::Config(format!(
            "{} statistic needs {} column(s), got {}",
            cfg.statistic,
            cfg.statistic.arity(),
            data.columns().len()
        )));
    }
    let methods = cfg.effective_methods();
    if let Some(m) = methods.iter().find(|m| !m.supports(cfg.statistic)) {
        return Err(HarnessError::Config(format!("method {m} does not apply to the {} statistic", cfg.statistic)));
    }
    let resampled;
    let data = match cfg.resample {
        Some(size) => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, &[TAG_RESAMPLE]));
            resampled = data.resample(size, &mut rng)?;
            &resampled
        }
        None => data,
    };
    let inp = MethodInputs {
        data,
        statistic: cfg.statistic,
        mu: cfg.mu,
        b: cfg.b,
        seed: cfg.seed,
        nsim: cfg.nsim,
        noise_mode: cfg.noise_mode,
        deconv: cfg.deconv,
    };
    let sensitivity = Statistic::new(cfg.statistic, data)?.sensitivity;
    let mut noise = Vec::new();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut point = None;
    for &method in &methods {
        match method {
            Method::DpBootstrap | Method::DpT | Method::DpStandard => {
                if !noise.iter().any(|s: &NoiseScale| s.method == Method::DpBootstrap) {
                    noise.push(NoiseScale {
                        method: Method::DpBootstrap,
                        releases: cfg.b,
                        variance: dp_bootstrap_sigma2(sensitivity, cfg.mu, cfg.b),
                    });
                }
            }
            Method::NoisyVar | Method::NoisyCov => {
                let k = if method == Method::NoisyVar { 2 } else { 3 };
                let sd = baseline_config(&inp, cfg.level[0]).noise_sd(k, sensitivity);
                noise.push(NoiseScale { method, releases: k, variance: sd * sd });
            }
            Method::Bootstrap => {}
        }
        match run_method(method, &inp, &cfg.level) {
            Ok(run) => {
                if point.is_none() {
                    if let Some(out) = &run.dp_output {
                        if out.estimates.len() >= 2 {
                            point = Some(estimate_with_se(out)?);
                        }
                    }
                }
                let covered = cfg.truth.map(|t| run.intervals.iter().map(|ci| ci.covers(t)).collect());
                reports.push(MethodReport { method, intervals: run.intervals, covered });
            }
            Err(e) => {
                log::warn!("{method} failed: {e}");
                failures.push(MethodFailure { method, error: e.to_string() });
            }
        }
    }
    Ok(RunReport {
        n: data.n(),
        dropped_rows,
        clamped_values: data.clamped_count(),
        statistic: cfg.statistic,
        sample_value: statistic_eval(data, cfg.statistic)?,
        mu: cfg.mu,
        b: cfg.b,
        point_estimate: point.map(|p| p.point),
        standard_error: point.map(|p| p.se),
        noise,
        methods: reports,
        failures,
    })
}
