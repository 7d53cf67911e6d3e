//! The Gaussian mechanism, built-in statistics and the private bootstrap.

mod dataset;
mod rng;

pub use dataset::{BoundsPolicy, Dataset, Statistic, StatisticId};
pub use rng::{mix_seed, replicate_rng, uniform_index, ReplicateRng};

use crate::accountant::BOOT_FACTOR_LIMIT;
use crate::error::{domain, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Add `N(0, (delta / mu)^2)` noise to every coordinate.
pub fn gaussian_release<R: Rng + ?Sized>(
    value: &[f64],
    delta: f64,
    mu: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(delta > 0.0) || !(mu > 0.0) {
        return Err(domain(format!(
            "sensitivity and mu must be positive, got {delta} and {mu}"
        )));
    }
    let sd = delta / mu;
    Ok(value
        .iter()
        .map(|v| v + sd * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// Run metadata carried with every private bootstrap output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpBootstrapMeta {
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub mu: f64,
    pub statistic: StatisticId,
    pub seed: u64,
}

/// Noisy bootstrap estimates plus the public noise variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpBootstrapOutput {
    pub estimates: Vec<f64>,
    pub sigma2: f64,
    pub meta: DpBootstrapMeta,
}

/// A private bootstrap run that also keeps the noiseless replicate values.
/// Only meant for testing: the noiseless values are not private.
#[derive(Clone, Debug)]
pub struct DpBootstrapRun {
    pub output: DpBootstrapOutput,
    pub noiseless: Vec<f64>,
}

/// Noise variance of one release when `B` releases share a `mu`-GDP budget.
pub fn dp_bootstrap_sigma2(sensitivity: f64, mu: f64, b: usize) -> f64 {
    let sd = BOOT_FACTOR_LIMIT * sensitivity * (b as f64).sqrt() / mu;
    sd * sd
}

/// Private bootstrap: `B` resamples, the statistic on each, Gaussian noise
/// scaled so the whole output is approximately `mu`-GDP. Replicate `b` draws
/// from stream `b` of a generator seeded with `seed`.
pub fn dp_bootstrap(
    data: &Dataset,
    stat: StatisticId,
    mu: f64,
    b: usize,
    seed: u64,
) -> Result<DpBootstrapOutput> {
    Ok(dp_bootstrap_instrumented(data, stat, mu, b, seed)?.output)
}

pub fn dp_bootstrap_instrumented(
    data: &Dataset,
    stat: StatisticId,
    mu: f64,
    b: usize,
    seed: u64,
) -> Result<DpBootstrapRun> {
    if !(mu > 0.0) {
        return Err(domain(format!("mu must be positive, got {mu}")));
    }
    if b == 0 {
        return Err(domain("B must be at least 1"));
    }
    let statistic = Statistic::new(stat, data)?;
    let sigma2 = dp_bootstrap_sigma2(statistic.sensitivity, mu, b);
    let sd = sigma2.sqrt();
    let pairs: Vec<(f64, f64)> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep as u64);
            let clean = data.eval_resample(stat, &mut rng);
            let noise: f64 = rng.sample(StandardNormal);
            (clean + sd * noise, clean)
        })
        .collect();
    let (estimates, noiseless) = pairs.into_iter().unzip();
    Ok(DpBootstrapRun {
        output: DpBootstrapOutput {
            estimates,
            sigma2,
            meta: DpBootstrapMeta {
                n: data.n(),
                b,
                mu,
                statistic: stat,
                seed,
            },
        },
        noiseless,
    })
}

/// Ordinary (non-private) bootstrap replicates of a statistic.
pub fn bootstrap_estimates(data: &Dataset, stat: StatisticId, b: usize, seed: u64) -> Result<Vec<f64>> {
    if stat.arity() != data.columns().len() {
        return Err(crate::DpError::Arity {
            stat: stat.name(),
            need: stat.arity(),
            have: data.columns().len(),
        });
    }
    Ok((0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep as u64);
            data.eval_resample(stat, &mut rng)
        })
        .collect())
}

/// The statistic on the full dataset.
pub fn statistic_eval(data: &Dataset, stat: StatisticId) -> Result<f64> {
    Statistic::new(stat, data)?;
    Ok(data.eval_full(stat))
}
