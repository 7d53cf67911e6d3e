//! Standard normal distribution helpers.
//!
//! `cdf` and `sf` are both provided so that upper tails keep full relative
//! precision. `erfc` comes from libm; the quantile starts from the statrs
//! inverse and takes one Newton step against `cdf`.

use libm::erfc;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Log of the standard normal density.
pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.918_938_533_204_672_8
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(x)`, accurate for large positive `x`.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// Standard normal quantile. Returns `-inf`/`inf` at 0 and 1.
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        // 1 - p is exact here
        return -quantile_lower(1.0 - p);
    }
    quantile_lower(p)
}

/// Inverse of the upper tail: returns `x` with `sf(x) = q`.
pub fn isf(q: f64) -> f64 {
    if q.is_nan() || !(0.0..=1.0).contains(&q) {
        return f64::NAN;
    }
    if q == 0.0 {
        return f64::INFINITY;
    }
    if q == 1.0 {
        return f64::NEG_INFINITY;
    }
    -quantile_lower(q)
}

// quantile for p <= 1/2 (also fine slightly above)
fn quantile_lower(p: f64) -> f64 {
    let x0 = -SQRT_2 * erfc_inv(2.0 * p);
    if !x0.is_finite() {
        return x0;
    }
    let dens = pdf(x0);
    if dens <= 0.0 {
        return x0;
    }
    x0 - (cdf(x0) - p) / dens
}

/// Student t quantile with real-valued degrees of freedom.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    if !(df > 0.0) {
        return f64::NAN;
    }
    if df > 1e7 {
        return quantile(p);
    }
    match StudentsT::new(0.0, 1.0, df) {
        Ok(t) => t.inverse_cdf(p),
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        // reference values from mpmath at 30 digits
        let cases = [
            (-1.0, 0.158_655_253_931_457_05),
            (0.5, 0.691_462_461_274_013_1),
            (-0.5, 0.308_537_538_725_986_9),
            (2.0, 0.977_249_868_051_820_8),
            (-8.0, 6.220_960_574_271_784e-16),
        ];
        for (x, want) in cases {
            let got = cdf(x);
            assert!(((got - want) / want).abs() < 1e-14, "cdf({x}) = {got}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-300, 1e-20, 1e-8, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-12] {
            let x = quantile(p);
            let back = cdf(x);
            assert!(((back - p) / p).abs() < 1e-13, "p={p} x={x} back={back}");
        }
        for &q in &[1e-200, 1e-9, 0.3] {
            let x = isf(q);
            assert!(((sf(x) - q) / q).abs() < 1e-13);
        }
    }

    #[test]
    fn t_quantile_large_df_is_normal() {
        assert!((t_quantile(0.95, 1e9) - quantile(0.95)).abs() < 1e-9);
        assert!((t_quantile(0.975, 10.0) - 2.228_138_851_964_938_5).abs() < 1e-9);
    }
}
