// Threshold tests on the explicit neighbouring pair D1 = (a, 0, ..., 0),
// D2 = (a - 1, 0, ..., 0) under the bootstrap mean with noise sd 1/(n mu).

use super::occupancy::{occupancy_probs, TAIL_MASS};
use crate::error::{domain, Result};
use crate::normal;

/// `(alpha, beta)` of the test that rejects when the release is at most the
/// threshold `z / (n mu)`.
pub fn worst_case_pair_point(probs: &[f64], mu: f64, a: f64, z: f64) -> (f64, f64) {
    let mut alpha = 0.0;
    let mut beta = 0.0;
    for (i, p) in probs.iter().enumerate() {
        let i = i as f64;
        alpha += p * normal::cdf(z - i * a * mu);
        beta += p * normal::cdf(i * (a - 1.0) * mu - z);
    }
    (alpha.clamp(0.0, 1.0), beta.clamp(0.0, 1.0))
}

/// Trace the pair curve over thresholds `z` (in units of the noise sd).
pub fn worst_case_pair_curve(mu: f64, n: u64, a: f64, zs: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(mu > 0.0) {
        return Err(domain("mu must be > 0"));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(domain("a must be in [0, 1]"));
    }
    let occ = occupancy_probs(n)?;
    let i_max = occ.truncation_index(TAIL_MASS);
    let probs = &occ.probs()[..=i_max];
    Ok(zs.iter().map(|&z| worst_case_pair_point(probs, mu, a, z)).collect())
}
