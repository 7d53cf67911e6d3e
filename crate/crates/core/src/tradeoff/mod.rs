//! Tradeoff functions and their algebra.
//!
//! A curve maps a type I error `alpha` to the smallest achievable type II
//! error. Every kind answers a *support query*: for a slope `c <= 0`, the
//! interval of `alpha` whose subdifferential contains `c`. Mixtures and the
//! subsampling operator are built entirely on top of that query, so their
//! evaluation reduces to one bisection over the slope.

mod piecewise;
pub mod export;
pub mod profile;

pub use profile::{delta_profile, fdp_from_profile, gdp_delta, PrivacyProfile};

use crate::error::{domain, DpError, Result};
use crate::normal;
use piecewise::PiecewiseLinear;
use std::sync::Arc;

/// Default tolerance for numerical symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-8;

const LOG_SLOPE_BRACKET: f64 = 50.0;
const SLOPE_TOL: f64 = 1e-12;
const MAX_BISECT: usize = 200;

/// The set of `alpha` where a supporting line of slope `c` touches a curve.
///
/// `beta_lo` is the curve value at `alpha_lo`; on `[alpha_lo, alpha_hi]` the
/// curve is linear with slope `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportSet {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub beta_lo: f64,
}

impl SupportSet {
    fn point(alpha: f64, beta: f64) -> Self {
        SupportSet {
            alpha_lo: alpha,
            alpha_hi: alpha,
            beta_lo: beta,
        }
    }

    /// Curve value at `alpha_hi`, given the slope the set was queried with.
    pub fn beta_hi(&self, c: f64) -> f64 {
        if self.alpha_hi == self.alpha_lo {
            self.beta_lo
        } else {
            self.beta_lo + c * (self.alpha_hi - self.alpha_lo)
        }
    }
}

/// Weighted components `(p_i, f_i)` of a mixture tradeoff function.
#[derive(Clone, Debug)]
pub struct MixtureSpec {
    components: Vec<(f64, TradeoffCurve)>,
}

impl MixtureSpec {
    /// Weights must be in (0, 1] and sum to 1 within 1e-12.
    pub fn new(components: Vec<(f64, TradeoffCurve)>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("mixture needs at least one component"));
        }
        let mut total = 0.0;
        for (w, _) in &components {
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(domain(format!("mixture weight {w} outside (0, 1]")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(MixtureSpec { components })
    }

    /// Like [`MixtureSpec::new`] but rescales positive weights to sum to one.
    pub fn normalized(components: Vec<(f64, TradeoffCurve)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(domain("mixture weights must have a positive finite sum"));
        }
        let comps = components
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, f)| (w / total, f))
            .collect();
        MixtureSpec::new(comps)
    }

    pub fn components(&self) -> &[(f64, TradeoffCurve)] {
        &self.components
    }

    fn support(&self, c: f64) -> SupportSet {
        let mut out = SupportSet::point(0.0, 0.0);
        for (w, f) in &self.components {
            let s = f.support(c);
            out.alpha_lo += w * s.alpha_lo;
            out.alpha_hi += w * s.alpha_hi;
            out.beta_lo += w * s.beta_lo;
        }
        out
    }
}

/// Read-only view of a curve's construction.
#[derive(Clone, Copy, Debug)]
pub enum CurveKind<'a> {
    Identity,
    Gdp { mu: f64 },
    EpsDelta { eps: f64, delta: f64 },
    Mixture(&'a MixtureSpec),
    Subsampled { inner: &'a TradeoffCurve, p: f64 },
    Tabulated,
}

#[derive(Clone, Debug)]
enum Kind {
    Identity,
    Gdp(f64),
    EpsDelta {
        eps: f64,
        delta: f64,
        pl: PiecewiseLinear,
    },
    Mixture {
        spec: MixtureSpec,
        symmetric: bool,
    },
    Subsampled {
        inner: Arc<TradeoffCurve>,
        p: f64,
    },
    Tabulated {
        pl: PiecewiseLinear,
        symmetric: bool,
    },
}

/// A convex, non-increasing tradeoff function on [0, 1].
#[derive(Clone, Debug)]
pub struct TradeoffCurve {
    kind: Kind,
}

impl TradeoffCurve {
    /// `1 - alpha`: the two hypotheses are indistinguishable.
    pub fn identity() -> Self {
        TradeoffCurve {
            kind: Kind::Identity,
        }
    }

    /// Gaussian tradeoff curve `G_mu`.
    pub fn gdp(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(domain(format!("GDP parameter must be finite and >= 0, got {mu}")));
        }
        if mu == 0.0 {
            return Ok(Self::identity());
        }
        Ok(TradeoffCurve { kind: Kind::Gdp(mu) })
    }

    /// The `(eps, delta)`-DP curve.
    pub fn epsdelta(eps: f64, delta: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(domain(format!("epsilon must be finite and >= 0, got {eps}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(domain(format!("delta must be in [0, 1], got {delta}")));
        }
        let one = 1.0 - delta;
        let (xs, ys, slopes) = if one == 0.0 {
            (vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0])
        } else {
            let kink = one / (1.0 + eps.exp());
            (
                vec![0.0, kink, one, 1.0],
                vec![one, kink, 0.0, 0.0],
                vec![-eps.exp(), -(-eps).exp(), 0.0],
            )
        };
        Ok(TradeoffCurve {
            kind: Kind::EpsDelta {
                eps,
                delta,
                pl: PiecewiseLinear::from_vertices(xs, ys, Some(slopes)),
            },
        })
    }

    pub fn mixture(spec: MixtureSpec) -> Self {
        let symmetric = spec.components.iter().all(|(_, f)| f.is_symmetric());
        TradeoffCurve {
            kind: Kind::Mixture { spec, symmetric },
        }
    }

    /// Curve through the given `(alpha, beta)` points, replaced by their
    /// lower convex hull. The first point must have `alpha = 0` and the last
    /// must be `(1, 0)`.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        Self::tabulated_with_tolerance(points, SYMMETRY_TOL)
    }

    pub fn tabulated_with_tolerance(points: &[(f64, f64)], sym_tol: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(domain("tabulated curve needs at least two points"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(domain("tabulated alphas must be strictly increasing"));
            }
        }
        for &(a, b) in points {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(domain(format!("point ({a}, {b}) outside the unit square")));
            }
        }
        if points[0].0 != 0.0 {
            return Err(domain("tabulated curve must start at alpha = 0"));
        }
        let last = points[points.len() - 1];
        if last != (1.0, 0.0) {
            return Err(domain("tabulated curve must end at (1, 0)"));
        }
        let clipped: Vec<(f64, f64)> = points.iter().map(|&(a, b)| (a, b.min(1.0 - a))).collect();
        let pl = PiecewiseLinear::lower_hull(&clipped);
        let mut curve = TradeoffCurve {
            kind: Kind::Tabulated {
                pl,
                symmetric: false,
            },
        };
        let symmetric = curve.check_symmetry(sym_tol);
        if let Kind::Tabulated { symmetric: s, .. } = &mut curve.kind {
            *s = symmetric;
        }
        Ok(curve)
    }

    pub fn kind(&self) -> CurveKind<'_> {
        match &self.kind {
            Kind::Identity => CurveKind::Identity,
            Kind::Gdp(mu) => CurveKind::Gdp { mu: *mu },
            Kind::EpsDelta { eps, delta, .. } => CurveKind::EpsDelta {
                eps: *eps,
                delta: *delta,
            },
            Kind::Mixture { spec, .. } => CurveKind::Mixture(spec),
            Kind::Subsampled { inner, p } => CurveKind::Subsampled { inner, p: *p },
            Kind::Tabulated { .. } => CurveKind::Tabulated,
        }
    }

    /// Vertices of a tabulated curve after the hull step.
    pub fn tabulated_vertices(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            Kind::Tabulated { pl, .. } => Some(pl.vertices().collect()),
            _ => None,
        }
    }

    /// Whether the curve is known to equal its own inverse.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            Kind::Identity | Kind::Gdp(_) | Kind::EpsDelta { .. } | Kind::Subsampled { .. } => {
                true
            }
            Kind::Mixture { symmetric, .. } | Kind::Tabulated { symmetric, .. } => *symmetric,
        }
    }

    /// Numerical symmetry check: `|f(f(a)) - a| <= tol` wherever `f(a) > 1e-6`.
    pub fn check_symmetry(&self, tol: f64) -> bool {
        let mut grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        if let Kind::Tabulated { pl, .. } = &self.kind {
            grid.extend(pl.vertices().map(|(a, _)| a));
        }
        grid.into_iter().all(|a| {
            let b = self.value(a);
            b <= 1e-6 || (self.value(b) - a).abs() <= tol
        })
    }

    /// Curve value at `alpha`; inputs are clamped to [0, 1].
    pub fn value(&self, alpha: f64) -> f64 {
        if alpha.is_nan() {
            return f64::NAN;
        }
        let alpha = alpha.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Identity => 1.0 - alpha,
            Kind::Gdp(mu) => gdp_value(*mu, alpha),
            Kind::EpsDelta { eps, delta, .. } => epsdelta_value(*eps, *delta, alpha),
            Kind::Tabulated { pl, .. } => pl.value(alpha),
            Kind::Mixture { .. } | Kind::Subsampled { .. } => self.value_by_support(alpha),
        }
    }

    /// Support query for slope `c` (values above 0 are treated as 0).
    pub fn support(&self, c: f64) -> SupportSet {
        let c = c.min(0.0);
        match &self.kind {
            Kind::Identity => {
                if c < -1.0 {
                    SupportSet::point(0.0, 1.0)
                } else if c == -1.0 {
                    SupportSet {
                        alpha_lo: 0.0,
                        alpha_hi: 1.0,
                        beta_lo: 1.0,
                    }
                } else {
                    SupportSet::point(1.0, 0.0)
                }
            }
            Kind::Gdp(mu) => {
                if c == f64::NEG_INFINITY {
                    SupportSet::point(0.0, 1.0)
                } else if c == 0.0 {
                    SupportSet::point(1.0, 0.0)
                } else {
                    let t = (-c).ln();
                    SupportSet::point(normal::sf(t / mu + mu / 2.0), normal::cdf(t / mu - mu / 2.0))
                }
            }
            Kind::EpsDelta { pl, .. } | Kind::Tabulated { pl, .. } => pl.support(c),
            Kind::Mixture { spec, .. } => spec.support(c),
            Kind::Subsampled { inner, p } => subsampled_support(inner, *p, c),
        }
    }

    /// Subdifferential `[c_lo, c_hi]` at `alpha`, restricted to slopes <= 0.
    pub fn subdiff_interval(&self, alpha: f64) -> (f64, f64) {
        let alpha = alpha.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Identity => {
                if alpha == 0.0 {
                    (f64::NEG_INFINITY, -1.0)
                } else if alpha == 1.0 {
                    (-1.0, 0.0)
                } else {
                    (-1.0, -1.0)
                }
            }
            Kind::Gdp(mu) => {
                let d = gdp_derivative(*mu, alpha);
                (d, d)
            }
            Kind::EpsDelta { pl, .. } | Kind::Tabulated { pl, .. } => pl.subdiff(alpha),
            Kind::Mixture { .. } | Kind::Subsampled { .. } => self.subdiff_by_support(alpha),
        }
    }

    /// Generalized inverse `inf { alpha : f(alpha) <= beta }`.
    pub fn inverse(&self, beta: f64) -> f64 {
        if beta.is_nan() {
            return f64::NAN;
        }
        let beta = beta.clamp(0.0, 1.0);
        if self.is_symmetric() {
            return self.value(beta);
        }
        if self.value(0.0) <= beta {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) <= beta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// The point `x` with `f(x) = x`.
    pub fn fixed_point(&self) -> f64 {
        match &self.kind {
            Kind::Identity => 0.5,
            Kind::Gdp(mu) => normal::cdf(-mu / 2.0),
            _ => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..MAX_BISECT {
                    let mid = 0.5 * (lo + hi);
                    let gap = self.value(mid) - mid;
                    if gap.abs() <= 1e-13 || mid <= lo || mid >= hi {
                        return mid;
                    }
                    if gap > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Evaluate on a grid of alphas.
    pub fn sample(&self, alphas: &[f64]) -> Vec<(f64, f64)> {
        alphas.iter().map(|&a| (a, self.value(a))).collect()
    }

    fn value_by_support(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            return self.support(f64::NEG_INFINITY).beta_lo;
        }
        if alpha >= 1.0 {
            return 0.0;
        }
        let (c_steep, s_steep) = self.slope_probe(LOG_SLOPE_BRACKET);
        if alpha <= s_steep.alpha_hi {
            if alpha >= s_steep.alpha_lo {
                return clamp_beta(s_steep.beta_lo + c_steep * (alpha - s_steep.alpha_lo), alpha);
            }
            // chord between (0, f(0)) and the steepest probed point
            let f0 = self.support(f64::NEG_INFINITY).beta_lo;
            let t = alpha / s_steep.alpha_lo;
            return clamp_beta(f0 + t * (s_steep.beta_lo - f0), alpha);
        }
        let (c_flat, s_flat) = self.slope_probe(-LOG_SLOPE_BRACKET);
        if alpha >= s_flat.alpha_lo {
            let zero = self.support(0.0).alpha_lo;
            if alpha >= zero {
                return 0.0;
            }
            if alpha <= s_flat.alpha_hi {
                return clamp_beta(s_flat.beta_lo + c_flat * (alpha - s_flat.alpha_lo), alpha);
            }
            let b = s_flat.beta_hi(c_flat);
            let t = (alpha - s_flat.alpha_hi) / (zero - s_flat.alpha_hi);
            return clamp_beta(b * (1.0 - t), alpha);
        }
        // alpha_lo(C) decreases as log(-C) grows
        let (mut t_flat, mut t_steep) = (-LOG_SLOPE_BRACKET, LOG_SLOPE_BRACKET);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..MAX_BISECT {
            if t_steep - t_flat <= SLOPE_TOL {
                break;
            }
            let mid = 0.5 * (t_flat + t_steep);
            let (c, s) = self.slope_probe(mid);
            best = best.max(s.beta_lo + c * (alpha - s.alpha_lo));
            if alpha < s.alpha_lo {
                t_flat = mid;
            } else if alpha > s.alpha_hi {
                t_steep = mid;
            } else {
                return clamp_beta(s.beta_lo + c * (alpha - s.alpha_lo), alpha);
            }
        }
        for t in [t_flat, t_steep] {
            let (c, s) = self.slope_probe(t);
            best = best.max(s.beta_lo + c * (alpha - s.alpha_lo));
        }
        clamp_beta(best, alpha)
    }

    fn slope_probe(&self, log_neg_slope: f64) -> (f64, SupportSet) {
        let c = -log_neg_slope.exp();
        (c, self.support(c))
    }

    fn subdiff_by_support(&self, alpha: f64) -> (f64, f64) {
        // c_lo = inf { c : alpha_hi(c) >= alpha }, c_hi = sup { c : alpha_lo(c) <= alpha }
        let c_lo = if alpha <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.slope_search(|s| s.alpha_hi >= alpha)
        };
        let c_hi = if alpha >= 1.0 {
            0.0
        } else {
            self.slope_search(|s| s.alpha_lo > alpha)
        };
        (c_lo.min(c_hi), c_hi)
    }

    // Largest log(-c) at which `pred` holds, returned as a slope; `pred` must
    // hold for flat slopes and fail for steep ones.
    fn slope_search(&self, pred: impl Fn(&SupportSet) -> bool) -> f64 {
        let (mut t_hold, mut t_fail) = (-LOG_SLOPE_BRACKET, LOG_SLOPE_BRACKET);
        if !pred(&self.slope_probe(t_hold).1) {
            return 0.0;
        }
        if pred(&self.slope_probe(t_fail).1) {
            return f64::NEG_INFINITY;
        }
        for _ in 0..MAX_BISECT {
            if t_fail - t_hold <= SLOPE_TOL {
                break;
            }
            let mid = 0.5 * (t_hold + t_fail);
            if pred(&self.slope_probe(mid).1) {
                t_hold = mid;
            } else {
                t_fail = mid;
            }
        }
        -(0.5 * (t_hold + t_fail)).exp()
    }
}

fn clamp_beta(beta: f64, alpha: f64) -> f64 {
    beta.clamp(0.0, 1.0 - alpha)
}

fn gdp_value(mu: f64, alpha: f64) -> f64 {
    // Φ(Φ⁻¹(1-α) - μ) with the upper quantile taken directly from α
    normal::cdf(normal::isf(alpha) - mu)
}

fn gdp_derivative(mu: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if alpha >= 1.0 {
        return 0.0;
    }
    -(-mu * mu / 2.0 + mu * normal::isf(alpha)).exp()
}

fn epsdelta_value(eps: f64, delta: f64, alpha: f64) -> f64 {
    let one = 1.0 - delta;
    0.0_f64
        .max(one - eps.exp() * alpha)
        .max((-eps).exp() * (one - alpha))
}

// Support of C_p(f) built from the three pieces: f_p = p f + (1-p) Id below
// the fixed point, a slope -1 segment, then the reflection of the first piece.
fn subsampled_support(inner: &TradeoffCurve, p: f64, c: f64) -> SupportSet {
    let fp0 = p * inner.support(f64::NEG_INFINITY).beta_lo + (1.0 - p);
    if c == f64::NEG_INFINITY {
        return SupportSet::point(0.0, fp0);
    }
    if c == 0.0 {
        return SupportSet {
            alpha_lo: fp0.min(1.0),
            alpha_hi: 1.0,
            beta_lo: 0.0,
        };
    }
    if c < -1.0 {
        let s = inner.support((c + 1.0 - p) / p);
        return SupportSet {
            alpha_lo: s.alpha_lo,
            alpha_hi: s.alpha_hi,
            beta_lo: p * s.beta_lo + (1.0 - p) * (1.0 - s.alpha_lo),
        };
    }
    if c == -1.0 {
        let s = inner.support(-1.0);
        let top = p * s.beta_lo + (1.0 - p) * (1.0 - s.alpha_lo);
        return SupportSet {
            alpha_lo: s.alpha_lo,
            alpha_hi: top.max(s.alpha_lo),
            beta_lo: top.max(s.alpha_lo),
        };
    }
    let mirror = subsampled_support(inner, p, 1.0 / c);
    SupportSet {
        alpha_lo: mirror.beta_hi(1.0 / c),
        alpha_hi: mirror.beta_lo,
        beta_lo: mirror.alpha_hi,
    }
}

/// `G_mu(alpha)` with domain checks.
pub fn eval_gdp(mu: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(domain(format!("GDP parameter must be finite and >= 0, got {mu}")));
    }
    Ok(gdp_value(mu, alpha))
}

/// `f_{eps,delta}(alpha)` with domain checks.
pub fn eval_epsdelta(eps: f64, delta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(eps >= 0.0) {
        return Err(domain(format!("epsilon must be >= 0, got {eps}")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(domain(format!("delta must be in [0, 1], got {delta}")));
    }
    Ok(epsdelta_value(eps, delta, alpha))
}

/// A `mu`-GDP mechanism is `k mu`-GDP for groups of size `k`.
pub fn gdp_group(mu: f64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(domain("group size must be at least 1"));
    }
    if !(mu >= 0.0) {
        return Err(domain(format!("GDP parameter must be >= 0, got {mu}")));
    }
    Ok(k as f64 * mu)
}

/// Point of the mixture curve whose supporting slope is `c`, taking the
/// smallest admissible alpha in every component.
pub fn mix_point(spec: &MixtureSpec, c: f64) -> Result<(f64, f64)> {
    if !(c <= 0.0) {
        return Err(domain(format!("slope must be <= 0, got {c}")));
    }
    let s = spec.support(c);
    Ok((s.alpha_lo, s.beta_lo))
}

/// Mixture curve value at `alpha`.
pub fn mix_at_alpha(spec: &MixtureSpec, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(TradeoffCurve::mixture(spec.clone()).value(alpha))
}

/// The subsampling operator `C_p` applied to a symmetric curve.
pub fn cp_apply(f: &TradeoffCurve, p: f64) -> Result<TradeoffCurve> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("sampling probability must be in [0, 1], got {p}")));
    }
    if !f.is_symmetric() {
        return Err(DpError::Precondition(
            "subsampling operator needs a symmetric curve".into(),
        ));
    }
    if p == 0.0 {
        return Ok(TradeoffCurve::identity());
    }
    if p == 1.0 {
        return Ok(f.clone());
    }
    Ok(TradeoffCurve {
        kind: Kind::Subsampled {
            inner: Arc::new(f.clone()),
            p,
        },
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!("alpha must be in [0, 1], got {alpha}")));
    }
    Ok(())
}
