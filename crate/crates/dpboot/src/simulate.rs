//! Monte-Carlo coverage and width of interval methods on synthetic data.

use crate::config::{DataModel, Method, SimConfig};
use crate::error::{HarnessError, Result};
use crate::ingest::read_csv;
use crate::methods::{run_method, MethodInputs};
use dpboot_core::mechanisms::{mix_seed, statistic_eval, Dataset, StatisticId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const TAG_DATA: u64 = 0x_da7a;
const TAG_METHOD: u64 = 0x_3e7d;

/// Aggregate over replicates for one (method, mu, level).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub method: Method,
    /// `None` for the non-private bootstrap.
    pub mu: Option<f64>,
    pub level: f64,
    /// Replicates that produced an interval.
    pub replicates: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub width_mean: f64,
    pub width_se: f64,
    pub width_sd: f64,
}

/// `F*(theta)` per replicate for methods with a recovered distribution;
/// `None` marks a failed replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub method: Method,
    pub mu: Option<f64>,
    pub fstar: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub method: Method,
    pub mu: Option<f64>,
    pub count: usize,
    pub first_error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config: SimConfig,
    /// Population value of the statistic.
    pub theta: f64,
    pub cells: Vec<CoverageCell>,
    pub calibration: Vec<Calibration>,
    pub failures: Vec<FailureSummary>,
}

impl CoverageReport {
    pub fn cell(&self, method: Method, mu: Option<f64>, level: f64) -> Option<&CoverageCell> {
        self.cells.iter().find(|c| c.method == method && c.mu == mu && c.level == level)
    }
}

/// `F*(theta)` inside `[a, 1 - a]` with `a = (1 - level) / 2`.
pub fn fstar_covers(fstar: f64, level: f64) -> bool {
    let a = (1.0 - level) / 2.0;
    fstar >= a - 1e-12 && fstar <= 1.0 - a + 1e-12
}

#[derive(Clone, Debug)]
struct CellOutcome {
    fstar: Option<f64>,
    // (width, covered) per level
    per_level: Vec<(f64, bool)>,
}

type Key = (Method, Option<usize>);

fn keys(cfg: &SimConfig) -> Vec<Key> {
    let mut out = Vec::new();
    for &m in &cfg.methods {
        if m.is_private() {
            out.extend((0..cfg.mu.len()).map(|k| (m, Some(k))));
        } else {
            out.push((m, None));
        }
    }
    out
}

enum Population {
    Uniform { cols: usize },
    Csv(Dataset),
}

impl Population {
    fn theta(&self, stat: StatisticId) -> Result<f64> {
        Ok(match self {
            Population::Uniform { .. } => match stat {
                StatisticId::Mean => 0.5,
                StatisticId::Variance => 1.0 / 12.0,
                StatisticId::Covariance => 0.0,
            },
            Population::Csv(d) => statistic_eval(d, stat)?,
        })
    }

    fn draw(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match self {
            Population::Uniform { cols } => {
                let columns = (0..*cols).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
                Dataset::unit(columns)?
            }
            Population::Csv(d) => d.resample(n, &mut rng)?,
        })
    }
}

fn population(cfg: &SimConfig) -> Result<Population> {
    let cols = cfg.statistic.arity();
    match cfg.data_model {
        DataModel::Uniform01 => Ok(Population::Uniform { cols }),
        DataModel::ResampleCsv => {
            let path = cfg.csv.as_ref().ok_or_else(|| HarnessError::Config("missing csv".into()))?;
            let table = read_csv(path, &cfg.columns)?;
            if table.columns.len() != cols {
                return Err(HarnessError::Config(format!(
                    "{} statistic needs {cols} column(s), got {}",
                    cfg.statistic,
                    table.columns.len()
                )));
            }
            let bounds = if cfg.bounds.is_empty() { vec![(0.0, 1.0); cols] } else { cfg.bounds.clone() };
            Ok(Population::Csv(Dataset::new(table.columns, bounds, Default::default())?))
        }
    }
}

fn replicate(cfg: &SimConfig, pop: &Population, theta: f64, rep: usize, keys: &[Key]) -> Vec<std::result::Result<CellOutcome, String>> {
    let data = match pop.draw(cfg.n, mix_seed(cfg.seed, &[rep as u64, TAG_DATA])) {
        Ok(d) => d,
        Err(e) => return vec![Err(e.to_string()); keys.len()],
    };
    keys.iter()
        .map(|&(method, mu_idx)| {
            let mu = mu_idx.map_or(f64::INFINITY, |k| cfg.mu[k]);
            let tag = mu_idx.map_or(u64::MAX, |k| k as u64);
            let inp = MethodInputs {
                data: &data,
                statistic: cfg.statistic,
                mu,
                b: cfg.b,
                seed: mix_seed(cfg.seed, &[rep as u64, TAG_METHOD, method as u64, tag]),
                nsim: cfg.nsim,
                noise_mode: cfg.noise_mode,
                deconv: cfg.deconv,
            };
            let run = run_method(method, &inp, &cfg.level).map_err(|e| e.to_string())?;
            let fstar = run.density.as_ref().map(|d| d.cdf(theta));
            let per_level = run
                .intervals
                .iter()
                .map(|ci| {
                    let covered = match fstar {
                        Some(f) if ci.method == dpboot_core::inference::CiMethod::Percentile => fstar_covers(f, ci.level),
                        _ => ci.covers(theta),
                    };
                    (ci.width(), covered)
                })
                .collect();
            Ok(CellOutcome { fstar, per_level })
        })
        .collect()
}

pub fn simulate_coverage(cfg: &SimConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let pop = population(cfg)?;
    let theta = pop.theta(cfg.statistic)?;
    let keys = keys(cfg);
    let outcomes: Vec<Vec<_>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| replicate(cfg, &pop, theta, rep, &keys))
        .collect();

    let mut cells = Vec::new();
    let mut calibration = Vec::new();
    let mut failures = Vec::new();
    for (col, &(method, mu_idx)) in keys.iter().enumerate() {
        let mu = mu_idx.map(|k| cfg.mu[k]);
        let column: Vec<&std::result::Result<CellOutcome, String>> = outcomes.iter().map(|r| &r[col]).collect();
        let ok: Vec<&CellOutcome> = column.iter().filter_map(|r| r.as_ref().ok()).collect();
        let errs: Vec<&String> = column.iter().filter_map(|r| r.as_ref().err()).collect();
        if let Some(first) = errs.first() {
            log::warn!("{method} mu={mu:?}: {} replicate(s) failed: {first}", errs.len());
            failures.push(FailureSummary { method, mu, count: errs.len(), first_error: (*first).clone() });
        }
        for (li, &level) in cfg.level.iter().enumerate() {
            let r = ok.len();
            let rf = r as f64;
            let covered = ok.iter().filter(|o| o.per_level[li].1).count() as f64;
            let widths: Vec<f64> = ok.iter().map(|o| o.per_level[li].0).collect();
            let p = if r > 0 { covered / rf } else { f64::NAN };
            let wmean = widths.iter().sum::<f64>() / rf;
            let wsd = if r > 1 {
                (widths.iter().map(|w| (w - wmean) * (w - wmean)).sum::<f64>() / (rf - 1.0)).sqrt()
            } else {
                0.0
            };
            cells.push(CoverageCell {
                method,
                mu,
                level,
                replicates: r,
                coverage: p,
                coverage_se: (p * (1.0 - p) / rf).sqrt(),
                width_mean: wmean,
                width_se: wsd / rf.sqrt(),
                width_sd: wsd,
            });
        }
        if matches!(method, Method::Bootstrap | Method::DpBootstrap) {
            let fstar = column.iter().map(|r| r.as_ref().ok().and_then(|o| o.fstar)).collect();
            calibration.push(Calibration { method, mu, fstar });
        }
    }
    Ok(CoverageReport { config: cfg.clone(), theta, cells, calibration, failures })
}
