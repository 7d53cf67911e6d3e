//! Privacy profiles `eps -> delta` and conversion back to tradeoff curves.

use super::{epsdelta_value, TradeoffCurve};
use crate::error::{domain, Result};
use crate::normal;
use std::fmt;
use std::sync::Arc;

const GRID_POINTS: usize = 2048;
const EPS_MIN: f64 = 1e-6;
const EPS_MAX: f64 = 50.0;
const GOLDEN_ITERS: usize = 80;

type DeltaFn = dyn Fn(f64) -> f64 + Send + Sync;

/// The smallest `delta` at each `eps` for which a mechanism is `(eps, delta)`-DP.
#[derive(Clone)]
pub struct PrivacyProfile {
    delta_fn: Arc<DeltaFn>,
    pairs: Option<Vec<(f64, f64)>>,
    grid: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for PrivacyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrivacyProfile")
            .field("pairs", &self.pairs)
            .field("grid_len", &self.grid.as_ref().map(Vec::len))
            .finish()
    }
}

impl PrivacyProfile {
    /// Wrap an arbitrary delta function. Values are clamped to [0, 1].
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PrivacyProfile {
            delta_fn: Arc::new(move |e| f(e).clamp(0.0, 1.0)),
            pairs: None,
            grid: None,
        }
    }

    /// Profile of a symmetric tradeoff curve.
    pub fn from_curve(curve: TradeoffCurve) -> Self {
        Self::from_fn(move |e| delta_at(&curve, e))
    }

    /// Closed-form profile of `G_mu`.
    pub fn gdp(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(domain(format!("GDP parameter must be finite and >= 0, got {mu}")));
        }
        Ok(Self::from_fn(move |e| gdp_delta(mu, e)))
    }

    /// A finite family of `(eps, delta)` guarantees. The implied curve is the
    /// pointwise maximum of the individual `f_{eps,delta}`.
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(domain("need at least one (eps, delta) pair"));
        }
        for &(e, d) in &pairs {
            if !(e >= 0.0) || !(0.0..=1.0).contains(&d) {
                return Err(domain(format!("invalid pair ({e}, {d})")));
            }
        }
        let lookup = pairs.clone();
        Ok(PrivacyProfile {
            delta_fn: Arc::new(move |eps| {
                lookup
                    .iter()
                    .filter(|(e, _)| *e <= eps)
                    .map(|(_, d)| *d)
                    .fold(1.0, f64::min)
            }),
            pairs: Some(pairs),
            grid: None,
        })
    }

    /// Attach a tabulated `(eps, delta)` grid for export.
    pub fn with_grid(mut self, grid: Vec<(f64, f64)>) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn grid(&self) -> Option<&[(f64, f64)]> {
        self.grid.as_deref()
    }

    pub fn delta(&self, eps: f64) -> f64 {
        (self.delta_fn)(eps)
    }
}

/// `delta(eps) = Φ(-eps/mu + mu/2) - e^eps Φ(-eps/mu - mu/2)`.
pub fn gdp_delta(mu: f64, eps: f64) -> f64 {
    if mu == 0.0 {
        return (1.0 - eps.exp()).max(0.0);
    }
    let d = normal::cdf(-eps / mu + mu / 2.0) - eps.exp() * normal::cdf(-eps / mu - mu / 2.0);
    d.clamp(0.0, 1.0)
}

fn delta_at(f: &TradeoffCurve, eps: f64) -> f64 {
    let slope = -eps.exp();
    if !slope.is_finite() {
        return (1.0 - f.value(0.0)).clamp(0.0, 1.0);
    }
    let s = f.support(slope);
    (1.0 - eps.exp() * s.alpha_lo - s.beta_lo).clamp(0.0, 1.0)
}

/// Privacy profile of a symmetric curve at `eps`, from the supporting line of
/// slope `-e^eps`.
pub fn delta_profile(f: &TradeoffCurve, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(domain(format!("epsilon must be >= 0, got {eps}")));
    }
    Ok(delta_at(f, eps))
}

/// Tradeoff value at `alpha` implied by a privacy profile: the supremum of
/// `f_{eps, delta(eps)}(alpha)` over `eps >= 0`.
pub fn fdp_from_profile(profile: &PrivacyProfile, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!("alpha must be in [0, 1], got {alpha}")));
    }
    if let Some(pairs) = &profile.pairs {
        let best = pairs
            .iter()
            .map(|&(e, d)| epsdelta_value(e, d, alpha))
            .fold(0.0, f64::max);
        return Ok(best.clamp(0.0, 1.0 - alpha));
    }
    let objective = |e: f64| epsdelta_value(e, profile.delta(e), alpha);
    let grid = eps_grid();
    let (mut k_best, mut best) = (0, f64::NEG_INFINITY);
    for (k, &e) in grid.iter().enumerate() {
        let v = objective(e);
        if v > best {
            best = v;
            k_best = k;
        }
    }
    let lo = grid[k_best.saturating_sub(1)];
    let hi = grid[(k_best + 1).min(grid.len() - 1)];
    best = best.max(golden_max(&objective, lo, hi));
    Ok(best.clamp(0.0, 1.0 - alpha))
}

/// `0` followed by 2048 log-spaced points on [1e-6, 50].
pub fn eps_grid() -> Vec<f64> {
    let (a, b) = (EPS_MIN.ln(), EPS_MAX.ln());
    std::iter::once(0.0)
        .chain((0..GRID_POINTS).map(|i| (a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64).exp()))
        .collect()
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
        if b - a < 1e-14 {
            break;
        }
    }
    best
}
