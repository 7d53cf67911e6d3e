use super::*;
use crate::tradeoff::{delta_profile, gdp_delta};
use approx::assert_abs_diff_eq;

#[test]
fn occupancy_small_and_large() {
    let o = occupancy_probs(2).unwrap();
    assert_abs_diff_eq!(o.probs()[0], 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(o.probs()[1], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(o.probs()[2], 0.25, epsilon = 1e-15);
    for n in [1u64, 3, 17, 1000, 100_000] {
        let s: f64 = occupancy_probs(n).unwrap().probs().iter().sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }
    // mpmath: (1 - 1e-6)^(1e6) - 1/e = -1.84e-7
    let big = occupancy_probs(1_000_000).unwrap();
    assert_abs_diff_eq!(big.p0(), (-1f64).exp(), epsilon = 1e-6);
    assert!(occupancy_probs(0).is_err());
}

#[test]
fn truncation_tail_is_small() {
    let o = occupancy_probs(1000).unwrap();
    let i = o.truncation_index(TAIL_MASS);
    let tail: f64 = o.probs()[i + 1..].iter().sum();
    assert!(tail < TAIL_MASS);
    let tail_prev: f64 = o.probs()[i..].iter().sum();
    assert!(tail_prev >= TAIL_MASS);
}

#[test]
fn factors() {
    assert_abs_diff_eq!(boot_factor(Some(1)), 1.0, epsilon = 1e-15);
    // mpmath: sqrt(2 - 2/e)
    assert_abs_diff_eq!(boot_factor(None), 1.124_384_772_956_800_3, epsilon = 1e-15);
    assert_abs_diff_eq!(BOOT_FACTOR_LIMIT, boot_factor(None), epsilon = 1e-15);
    // mpmath: 1/sqrt(2 - 2/e), 1/sqrt(1000 (2 - 2/e))
    assert_abs_diff_eq!(per_sample_mu(1.0, 1).unwrap(), 0.889_375_260_188_107, epsilon = 1e-14);
    assert_abs_diff_eq!(per_sample_mu(1.0, 1000).unwrap(), 0.028_124_515_167_992_91, epsilon = 1e-15);
    assert_abs_diff_eq!(per_sample_mu(boot_factor(None), 1).unwrap(), 1.0, epsilon = 1e-15);
    let plan = BudgetPlan::new(1.0, 200, Some(3000)).unwrap();
    assert_abs_diff_eq!(plan.mu_per_sample * plan.factor * 200f64.sqrt(), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(
        asymptotic_total_mu(plan.mu_per_sample, 200, Some(3000)).unwrap(),
        1.0,
        epsilon = 1e-14
    );
}

#[test]
fn boot_curve_basics() {
    for (mu, n) in [(1.0, 1000), (0.3, 10), (2.0, 2)] {
        let c = boot_curve(mu, n).unwrap();
        assert_abs_diff_eq!(c.value(0.0), 1.0, epsilon = 1e-12);
        assert_eq!(c.value(1.0), 0.0);
        assert!(c.curve().is_symmetric());
    }
    let tiny = boot_curve(1e-6, 50).unwrap();
    for i in 0..=10 {
        let a = i as f64 / 10.0;
        assert_abs_diff_eq!(tiny.value(a), 1.0 - a, epsilon = 1e-5);
    }
    let c = boot_curve(1.0, 1000).unwrap();
    let g1 = crate::tradeoff::TradeoffCurve::gdp(1.0).unwrap();
    assert!((1..100).any(|i| c.value(i as f64 / 100.0) < g1.value(i as f64 / 100.0) - 1e-3));
    assert!(boot_curve(0.0, 10).is_err());
    // n = 1: the resample is the record itself
    let one = boot_curve(0.7, 1).unwrap();
    let g07 = crate::tradeoff::TradeoffCurve::gdp(0.7).unwrap();
    assert_abs_diff_eq!(one.value(0.3), g07.value(0.3), epsilon = 1e-10);
}

#[test]
fn shifted_profile_identity_spot() {
    let (mu, n, eps) = (1.0, 100, 0.5_f64);
    let c = boot_curve(mu, n).unwrap();
    let o = occupancy_probs(n).unwrap();
    let eps_amp = (1.0 + (1.0 - o.p0()) * (eps.exp() - 1.0)).ln();
    let lhs = delta_profile(c.curve(), eps_amp).unwrap();
    let rhs: f64 = o
        .probs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, p)| p * gdp_delta(i as f64 * mu, eps))
        .sum();
    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
}

#[test]
fn compose_single_release_matches_curve() {
    let (mu, n) = (0.7, 50);
    let c = boot_curve(mu, n).unwrap();
    let prof = compose_boot_profile(mu, n, 1, &ComposeConfig::default()).unwrap();
    for &e in &[0.0, 0.3, 1.0, 2.0] {
        let want = delta_profile(c.curve(), e).unwrap();
        assert_abs_diff_eq!(prof.delta(e), want, epsilon = 1e-4);
    }
}

#[test]
fn compose_cap_is_enforced() {
    let err = compose_boot_profile(0.1, 10, 5001, &ComposeConfig::default()).unwrap_err();
    assert!(matches!(err, crate::DpError::Resource(_)));
}

#[test]
fn compose_matches_gdp_limit() {
    let mu_b = per_sample_mu(1.0, 500).unwrap();
    let d = compose_boot_delta(mu_b, 100, 500, 1.0).unwrap();
    // mpmath: ncdf(-0.5) - e ncdf(-1.5)
    assert_abs_diff_eq!(d, 0.126_936_737_506_644, epsilon = 0.01);
    assert!(compose_boot_delta(mu_b, 100, 500, 40.0).unwrap() < 1e-12);
}
