//! Privacy accounting for bootstrap resampling with the Gaussian mechanism.

mod budget;
mod compose;
mod occupancy;
mod worst_case;

pub use budget::{asymptotic_total_mu, boot_factor, per_sample_mu, BudgetPlan, BOOT_FACTOR_LIMIT};
pub use compose::{compose_boot_delta, compose_boot_profile, ComposeConfig, ComposedProfile};
pub use occupancy::{occupancy_probs, BinomialOccupancy, TAIL_MASS};
pub use worst_case::{worst_case_pair_curve, worst_case_pair_point};

use crate::error::{domain, Result};
use crate::tradeoff::{cp_apply, MixtureSpec, SupportSet, TradeoffCurve};

/// The bootstrap privacy bound for a `mu`-GDP release on resampled data of
/// size `n`: the subsampling operator with rate `1 - p_0` applied to the
/// mixture of `G_{i mu}` weighted by occupancy counts `i >= 1`.
#[derive(Clone, Debug)]
pub struct BootCurve {
    mu: f64,
    n: u64,
    p0: f64,
    weights: Vec<f64>,
    curve: TradeoffCurve,
}

/// Build the bootstrap bound for per-release parameter `mu`.
pub fn boot_curve(mu: f64, n: u64) -> Result<BootCurve> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(domain(format!("per-release mu must be finite and > 0, got {mu}")));
    }
    let occ = occupancy_probs(n)?;
    let weights = occ.positive_weights(TAIL_MASS);
    let comps = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| Ok((w, TradeoffCurve::gdp((k + 1) as f64 * mu)?)))
        .collect::<Result<Vec<_>>>()?;
    let inner = TradeoffCurve::mixture(MixtureSpec::new(comps)?);
    let p0 = occ.p0();
    let curve = cp_apply(&inner, 1.0 - p0)?;
    Ok(BootCurve {
        mu,
        n,
        p0,
        weights,
        curve,
    })
}

impl BootCurve {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Probability that a given record is left out of a resample.
    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Normalized weights of occupancy counts `1..=i_max`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn i_max(&self) -> usize {
        self.weights.len()
    }

    pub fn curve(&self) -> &TradeoffCurve {
        &self.curve
    }

    pub fn value(&self, alpha: f64) -> f64 {
        self.curve.value(alpha)
    }

    pub fn inverse(&self, beta: f64) -> f64 {
        self.curve.inverse(beta)
    }

    pub fn subdiff_interval(&self, alpha: f64) -> (f64, f64) {
        self.curve.subdiff_interval(alpha)
    }

    pub fn fixed_point(&self) -> f64 {
        self.curve.fixed_point()
    }

    /// Curve point whose supporting slope is `c`.
    pub fn point_at_slope(&self, c: f64) -> (f64, f64) {
        let SupportSet {
            alpha_lo, beta_lo, ..
        } = self.curve.support(c);
        (alpha_lo, beta_lo)
    }
}

#[cfg(test)]
mod tests;
