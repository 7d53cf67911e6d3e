//! Closed-form checks on two small bootstrap counterexamples: a Rényi-2
//! divergence that exceeds the zCDP bound, and a pair of privacy-loss
//! computations where the naive subsampling pair is not the worst case.

use crate::error::{domain, DpError, Result};
use crate::normal;

/// Finite mixture of univariate normals, stored as (weight, mean, variance).
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture1D {
    components: Vec<(f64, f64, f64)>,
}

impl GaussianMixture1D {
    pub fn new(components: Vec<(f64, f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("mixture needs at least one component"));
        }
        if components.iter().any(|&(w, m, v)| !(w > 0.0) || !m.is_finite() || !(v > 0.0)) {
            return Err(domain("weights and variances must be positive, means finite"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    /// Unit-variance components from (weight, mean) pairs.
    pub fn unit(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(w, m)| (w, m, 1.0)).collect())
    }

    pub fn components(&self) -> &[(f64, f64, f64)] {
        &self.components
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|&(w, m, v)| {
                let s = v.sqrt();
                w.ln() + normal::ln_pdf((x - m) / s) - s.ln()
            })
            .collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|&(w, m, v)| w * normal::cdf((x - m) / v.sqrt())).sum()
    }

    fn unit_variance(&self) -> bool {
        self.components.iter().all(|c| c.2 == 1.0)
    }
}

/// Rényi divergence of order 2 between a unit-variance mixture `p` and a
/// single unit-variance normal `q`.
pub fn renyi2_divergence(p: &GaussianMixture1D, q: &GaussianMixture1D) -> Result<f64> {
    if !p.unit_variance() || !q.unit_variance() {
        return Err(DpError::Unsupported("only unit-variance components are supported".into()));
    }
    let c = match (q.components.as_slice(), p == q) {
        (_, true) => return Ok(0.0),
        ([(_, c, _)], false) => *c,
        _ => return Err(DpError::Unsupported("reference law must be a single normal".into())),
    };
    // E_q[(dp/dq)^2] = sum_ij w_i w_j exp((m_i - c)(m_j - c))
    let mut terms = Vec::new();
    for &(wi, mi, _) in &p.components {
        for &(wj, mj, _) in &p.components {
            terms.push(wi.ln() + wj.ln() + (mi - c) * (mj - c));
        }
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln())
}

/// Outputs of [`pld_delta_pair`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PldPair {
    /// Privacy-loss delta for the actual bootstrap pair.
    pub delta1: f64,
    /// Privacy-loss delta for the subsampling-with-replacement pair.
    pub delta2: f64,
    pub t1: f64,
    pub t3: f64,
}

fn bootstrap_pair() -> (GaussianMixture1D, GaussianMixture1D) {
    let x = GaussianMixture1D::unit(&[(0.25, -2.0), (0.5, 0.0), (0.25, 2.0)]).unwrap();
    let y = GaussianMixture1D::unit(&[(1.0, 2.0)]).unwrap();
    (x, y)
}

fn subsampling_pair() -> (GaussianMixture1D, GaussianMixture1D) {
    let x = GaussianMixture1D::unit(&[(0.25, 0.0), (0.5, -1.0), (0.25, -2.0)]).unwrap();
    let y = GaussianMixture1D::unit(&[(0.25, 0.0), (0.5, 1.0), (0.25, 2.0)]).unwrap();
    (x, y)
}

/// Threshold where the decreasing log-ratio `ln fx - ln fy` crosses `eps`,
/// then `F_x(t) - e^eps F_y(t)`.
fn loss_delta(x: &GaussianMixture1D, y: &GaussianMixture1D, eps: f64) -> (f64, f64) {
    let ratio = |t: f64| x.ln_pdf(t) - y.ln_pdf(t) - eps;
    let (mut lo, mut hi) = (-20.0_f64, 20.0_f64);
    if ratio(lo) <= 0.0 {
        hi = lo;
    } else if ratio(hi) >= 0.0 {
        lo = hi;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let delta = (x.cdf(t) - eps.exp() * y.cdf(t)).clamp(0.0, 1.0);
    (t, delta)
}

pub fn pld_delta_pair(eps: f64) -> Result<PldPair> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(domain(format!("epsilon {eps} must be finite and nonnegative")));
    }
    let (x1, y1) = bootstrap_pair();
    let (x2, y2) = subsampling_pair();
    let (t1, delta1) = loss_delta(&x1, &y1, eps);
    let (t3, delta2) = loss_delta(&x2, &y2, eps);
    Ok(PldPair { delta1, delta2, t1, t3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renyi_identities() {
        let p = GaussianMixture1D::unit(&[(0.25, 0.0), (0.5, 1.0), (0.25, 2.0)]).unwrap();
        let q = GaussianMixture1D::unit(&[(1.0, 0.0)]).unwrap();
        assert_eq!(renyi2_divergence(&p, &p).unwrap(), 0.0);
        let one = GaussianMixture1D::unit(&[(1.0, 1.0)]).unwrap();
        assert!((renyi2_divergence(&one, &q).unwrap() - 1.0).abs() < 1e-15);
        assert!((renyi2_divergence(&p, &q).unwrap() - 1.852653679630682).abs() < 1e-12);
    }

    #[test]
    fn renyi_rejects_mixture_reference() {
        let p = GaussianMixture1D::unit(&[(0.5, 0.0), (0.5, 1.0)]).unwrap();
        let q = GaussianMixture1D::unit(&[(0.5, 0.0), (0.5, 2.0)]).unwrap();
        assert!(matches!(renyi2_divergence(&p, &q), Err(DpError::Unsupported(_))));
    }

    #[test]
    fn pld_values_at_other_epsilons() {
        let r = pld_delta_pair(0.5).unwrap();
        assert!((r.t1 - 0.4979904634423243).abs() < 1e-9);
        assert!((r.delta1 - 0.5007349084541334).abs() < 1e-9);
        assert!((r.t3 + 0.3946203123849868).abs() < 1e-9);
        assert!((r.delta2 - 0.4733435973945831).abs() < 1e-9);
        let r = pld_delta_pair(2.0).unwrap();
        assert!((r.delta1 - 0.3534999958036831).abs() < 1e-9);
        assert!((r.delta2 - 0.1971529198235128).abs() < 1e-9);
    }
}
