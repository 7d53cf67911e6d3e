use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// `sqrt(2 - 2/e)`, the large-`n` composition factor.
pub const BOOT_FACTOR_LIMIT: f64 = 1.124_384_772_956_800_3;

/// Finite-`n` factor `sqrt((2 - 1/n)(1 - (1 - 1/n)^n))`; `None` means the
/// `n -> inf` limit.
pub fn boot_factor(n: Option<u64>) -> f64 {
    match n {
        None => (2.0 - 2.0 / std::f64::consts::E).sqrt(),
        Some(0) => f64::NAN,
        Some(n) => {
            let nf = n as f64;
            let stay = (nf * (-1.0 / nf).ln_1p()).exp();
            ((2.0 - 1.0 / nf) * (1.0 - stay)).sqrt()
        }
    }
}

/// Per-release GDP parameter so that `B` releases total roughly `mu_total`.
pub fn per_sample_mu(mu_total: f64, b: u64) -> Result<f64> {
    if !(mu_total > 0.0) || b == 0 {
        return Err(domain("need mu_total > 0 and B >= 1"));
    }
    Ok(mu_total / (boot_factor(None) * (b as f64).sqrt()))
}

/// Total GDP parameter of `B` bootstrap releases at per-release `mu_b`.
pub fn asymptotic_total_mu(mu_b: f64, b: u64, n: Option<u64>) -> Result<f64> {
    if !(mu_b > 0.0) || b == 0 || n == Some(0) {
        return Err(domain("need mu_b > 0, B >= 1 and n >= 1"));
    }
    Ok(boot_factor(n) * (b as f64).sqrt() * mu_b)
}

/// Split of a total GDP budget over `B` bootstrap releases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub mu_total: f64,
    #[serde(rename = "B")]
    pub b: u64,
    pub n: Option<u64>,
    pub mu_per_sample: f64,
    pub factor: f64,
}

impl BudgetPlan {
    pub fn new(mu_total: f64, b: u64, n: Option<u64>) -> Result<Self> {
        if !(mu_total > 0.0) || b == 0 || n == Some(0) {
            return Err(domain("need mu_total > 0, B >= 1 and n >= 1"));
        }
        let factor = boot_factor(n);
        Ok(BudgetPlan {
            mu_total,
            b,
            n,
            mu_per_sample: mu_total / (factor * (b as f64).sqrt()),
            factor,
        })
    }
}
