//! Inference from noisy bootstrap estimates: deconvolution of the noise,
//! percentile, standard and t intervals, and the choice of `B`.

mod ci;
mod deconv;
mod spline;

pub use ci::{
    choose_b, estimate_with_se, moment_estimates, percentile_ci, snr_feasible, standard_ci,
    t_ci_adjusted, PointEstimate, SNR_BOUND,
};
pub use deconv::{
    deconvolve_mle, deconvolve_mle_fit, DeconvConfig, DeconvFit, PenalizedLikelihood,
    RecoveredDensity,
};
pub use spline::{natural_spline_basis, standardized_basis};

use serde::{Deserialize, Serialize};

/// How an interval was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CiMethod {
    #[serde(rename = "percentile")]
    Percentile,
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "t_adjusted")]
    TAdjusted,
    #[serde(rename = "noisyvar")]
    NoisyVar,
    #[serde(rename = "noisycov")]
    NoisyCov,
}

impl CiMethod {
    pub fn name(self) -> &'static str {
        match self {
            CiMethod::Percentile => "percentile",
            CiMethod::Standard => "standard",
            CiMethod::TAdjusted => "t_adjusted",
            CiMethod::NoisyVar => "noisyvar",
            CiMethod::NoisyCov => "noisycov",
        }
    }
}

/// A confidence interval with any warnings raised while building it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub method: CiMethod,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub flags: Vec<String>,
}

impl CiResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }
}

#[cfg(test)]
mod tests;
