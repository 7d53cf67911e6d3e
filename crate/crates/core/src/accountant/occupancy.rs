use crate::error::{domain, Result};

/// Tail mass below which occupancy counts are dropped from mixtures.
pub const TAIL_MASS: f64 = 1e-15;

/// Distribution of how many times one record appears in a bootstrap
/// resample of size `n`: Binomial(n, 1/n).
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialOccupancy {
    n: u64,
    probs: Vec<f64>,
}

/// Occupancy probabilities `p_0..p_n`, built by a log-space recurrence.
pub fn occupancy_probs(n: u64) -> Result<BinomialOccupancy> {
    if n == 0 {
        return Err(domain("dataset size must be at least 1"));
    }
    let len = n as usize + 1;
    let mut probs = vec![0.0; len];
    if n == 1 {
        probs[1] = 1.0;
        return Ok(BinomialOccupancy { n, probs });
    }
    let nf = n as f64;
    let ln_step = (nf - 1.0).ln();
    let mut lp = nf * (-1.0 / nf).ln_1p();
    for (i, slot) in probs.iter_mut().enumerate() {
        *slot = lp.exp();
        if lp < -800.0 && i > 2 {
            break;
        }
        let fi = i as f64;
        lp += (nf - fi).ln() - (fi + 1.0).ln() - ln_step;
    }
    Ok(BinomialOccupancy { n, probs })
}

impl BinomialOccupancy {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p0(&self) -> f64 {
        self.probs[0]
    }

    /// Smallest `i` with `sum_{j > i} p_j < tail`.
    pub fn truncation_index(&self, tail: f64) -> usize {
        let mut acc = 0.0;
        for i in (0..self.probs.len()).rev() {
            // acc holds the mass strictly above i
            if acc >= tail {
                return (i + 1).min(self.probs.len() - 1);
            }
            acc += self.probs[i];
        }
        0
    }

    /// Weights `p_i / (1 - p_0)` for `i = 1..=i_max`, renormalized after
    /// truncation.
    pub fn positive_weights(&self, tail: f64) -> Vec<f64> {
        let i_max = self.truncation_index(tail).max(1);
        let w = &self.probs[1..=i_max];
        let total: f64 = w.iter().sum();
        w.iter().map(|p| p / total).collect()
    }
}
