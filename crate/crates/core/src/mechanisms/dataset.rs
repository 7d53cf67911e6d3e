use super::rng::uniform_index;
use crate::error::{DpError, Result};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// What to do with values outside the declared bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsPolicy {
    #[default]
    Clamp,
    Reject,
}

/// One or two bounded numeric columns of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
    clamped: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>, policy: BoundsPolicy) -> Result<Self> {
        if columns.is_empty() || columns.len() > 2 {
            return Err(DpError::Domain("a dataset has one or two columns".into()));
        }
        if bounds.len() != columns.len() {
            return Err(DpError::Domain("need one (lo, hi) pair per column".into()));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(DpError::Domain("columns differ in length".into()));
        }
        if n < 2 {
            return Err(DpError::InsufficientData(format!("need n >= 2 rows, got {n}")));
        }
        for &(lo, hi) in &bounds {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(DpError::Domain(format!("invalid bounds [{lo}, {hi}]")));
            }
        }
        let mut columns = columns;
        let mut clamped = 0;
        for (col, &(lo, hi)) in columns.iter_mut().zip(&bounds) {
            for v in col.iter_mut() {
                if v.is_nan() {
                    return Err(DpError::Domain("NaN in dataset".into()));
                }
                if *v < lo || *v > hi {
                    if policy == BoundsPolicy::Reject {
                        return Err(DpError::Bounds(format!("value {v} outside [{lo}, {hi}]")));
                    }
                    *v = v.clamp(lo, hi);
                    clamped += 1;
                }
            }
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} value(s) to the declared bounds");
        }
        Ok(Dataset {
            columns,
            bounds,
            clamped,
        })
    }

    /// Columns bounded in [0, 1], clamping out-of-range values.
    pub fn unit(columns: Vec<Vec<f64>>) -> Result<Self> {
        let bounds = vec![(0.0, 1.0); columns.len()];
        Self::new(columns, bounds, BoundsPolicy::Clamp)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Number of values moved onto a bound at construction.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    /// Rows drawn with replacement, keeping the bounds.
    pub fn resample<R: RngCore + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Dataset> {
        let n = self.n();
        let idx: Vec<usize> = (0..size).map(|_| uniform_index(rng, n)).collect();
        let columns = self
            .columns
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect();
        Dataset::new(columns, self.bounds.clone(), BoundsPolicy::Reject)
    }

    pub(crate) fn eval_full(&self, stat: StatisticId) -> f64 {
        let idx: Vec<usize> = (0..self.n()).collect();
        self.eval_indices(stat, &idx)
    }

    pub(crate) fn eval_resample<R: RngCore + ?Sized>(&self, stat: StatisticId, rng: &mut R) -> f64 {
        let n = self.n();
        let idx: Vec<usize> = (0..n).map(|_| uniform_index(rng, n)).collect();
        self.eval_indices(stat, &idx)
    }

    fn eval_indices(&self, stat: StatisticId, idx: &[usize]) -> f64 {
        let m = idx.len() as f64;
        let x = &self.columns[0];
        let mean_x = idx.iter().map(|&i| x[i]).sum::<f64>() / m;
        match stat {
            StatisticId::Mean => mean_x,
            StatisticId::Variance => {
                idx.iter().map(|&i| (x[i] - mean_x).powi(2)).sum::<f64>() / (m - 1.0)
            }
            StatisticId::Covariance => {
                let y = &self.columns[1];
                let mean_y = idx.iter().map(|&i| y[i]).sum::<f64>() / m;
                idx.iter()
                    .map(|&i| (x[i] - mean_x) * (y[i] - mean_y))
                    .sum::<f64>()
                    / (m - 1.0)
            }
        }
    }
}

/// Built-in statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticId {
    Mean,
    Variance,
    Covariance,
}

impl StatisticId {
    pub fn arity(self) -> usize {
        match self {
            StatisticId::Covariance => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StatisticId::Mean => "mean",
            StatisticId::Variance => "variance",
            StatisticId::Covariance => "covariance",
        }
    }
}

impl fmt::Display for StatisticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticId {
    type Err = DpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(StatisticId::Mean),
            "variance" | "var" => Ok(StatisticId::Variance),
            "covariance" | "cov" => Ok(StatisticId::Covariance),
            other => Err(DpError::Unsupported(format!("unknown statistic '{other}'"))),
        }
    }
}

/// A statistic together with its L2 sensitivity on a given dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Statistic {
    pub id: StatisticId,
    pub sensitivity: f64,
}

impl Statistic {
    /// Sensitivity from the column bounds: range/n for the mean, range^2/n
    /// for the variance and the product of ranges over n for the covariance.
    pub fn new(id: StatisticId, data: &Dataset) -> Result<Self> {
        let have = data.columns.len();
        if have != id.arity() {
            return Err(DpError::Arity {
                stat: id.name(),
                need: id.arity(),
                have,
            });
        }
        let n = data.n() as f64;
        let width = |k: usize| data.bounds[k].1 - data.bounds[k].0;
        let sensitivity = match id {
            StatisticId::Mean => width(0) / n,
            StatisticId::Variance => width(0) * width(0) / n,
            StatisticId::Covariance => width(0) * width(1) / n,
        };
        Ok(Statistic { id, sensitivity })
    }
}
