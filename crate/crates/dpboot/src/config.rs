//! Simulation and run configuration, loadable from flat JSON.

use crate::error::{HarnessError, Result};
use dpboot_core::baselines::NoiseMode;
use dpboot_core::inference::DeconvConfig;
use dpboot_core::mechanisms::StatisticId;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Non-private percentile bootstrap.
    #[serde(rename = "bootstrap")]
    Bootstrap,
    /// Private bootstrap, deconvolved, percentile interval.
    #[serde(rename = "dp_bootstrap")]
    DpBootstrap,
    /// Private bootstrap, adjusted-df t interval.
    #[serde(rename = "dp_t")]
    DpT,
    /// Private bootstrap, normal interval.
    #[serde(rename = "dp_standard")]
    DpStandard,
    #[serde(rename = "noisyvar")]
    NoisyVar,
    #[serde(rename = "noisycov")]
    NoisyCov,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Bootstrap,
        Method::DpBootstrap,
        Method::DpT,
        Method::DpStandard,
        Method::NoisyVar,
        Method::NoisyCov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bootstrap => "bootstrap",
            Method::DpBootstrap => "dp_bootstrap",
            Method::DpT => "dp_t",
            Method::DpStandard => "dp_standard",
            Method::NoisyVar => "noisyvar",
            Method::NoisyCov => "noisycov",
        }
    }

    pub fn is_private(self) -> bool {
        self != Method::Bootstrap
    }

    /// Whether the method can produce an interval for `stat`.
    pub fn supports(self, stat: StatisticId) -> bool {
        match self {
            Method::NoisyVar => stat == StatisticId::Mean,
            Method::NoisyCov => stat == StatisticId::Covariance,
            _ => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataModel {
    /// iid Uniform(0, 1) columns (independent when two are needed).
    #[default]
    Uniform01,
    /// Rows drawn with replacement from a CSV population.
    ResampleCsv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub mu: Vec<f64>,
    pub level: Vec<f64>,
    pub replicates: usize,
    pub data_model: DataModel,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub statistic: StatisticId,
    /// Population file for `resample_csv`.
    pub csv: Option<PathBuf>,
    pub columns: Vec<String>,
    /// One `[lo, hi]` per column; defaults to [0, 1].
    pub bounds: Vec<(f64, f64)>,
    pub nsim: usize,
    pub noise_mode: NoiseMode,
    #[serde(flatten)]
    pub deconv: DeconvConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 3000,
            b: 200,
            mu: vec![1.0],
            level: vec![0.9],
            replicates: 300,
            data_model: DataModel::Uniform01,
            seed: 0,
            methods: vec![Method::Bootstrap, Method::DpBootstrap],
            statistic: StatisticId::Mean,
            csv: None,
            columns: vec![],
            bounds: vec![],
            nsim: 2000,
            noise_mode: NoiseMode::BudgetSplit,
            deconv: DeconvConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if self.b < 1 {
            return bad("B must be at least 1".into());
        }
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.methods.iter().any(|m| m.is_private()) && self.mu.is_empty() {
            return bad("private methods need at least one mu".into());
        }
        if let Some(mu) = self.mu.iter().find(|&&m| !(m > 0.0)) {
            return bad(format!("mu = {mu} must be positive"));
        }
        if self.level.is_empty() || self.level.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
            return bad("levels must be nonempty and inside (0, 1)".into());
        }
        if let Some(m) = self.methods.iter().find(|m| !m.supports(self.statistic)) {
            return bad(format!("method {m} does not apply to the {} statistic", self.statistic));
        }
        if self.data_model == DataModel::ResampleCsv && self.csv.is_none() {
            return bad("resample_csv needs a csv path".into());
        }
        self.deconv.validate()?;
        Ok(())
    }
}
