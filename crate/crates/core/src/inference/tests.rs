use super::*;
use crate::mechanisms::{DpBootstrapMeta, DpBootstrapOutput, StatisticId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn output(estimates: Vec<f64>, sigma2: f64, n: usize, mu: f64) -> DpBootstrapOutput {
    let b = estimates.len();
    DpBootstrapOutput {
        estimates,
        sigma2,
        meta: DpBootstrapMeta { n, b, mu, statistic: StatisticId::Mean, seed: 0 },
    }
}

#[test]
fn moments_from_hand_computation() {
    let (m1, m2) = moment_estimates(&[1.0, 2.0, 3.0], 0.0).unwrap();
    assert_eq!(m1, 2.0);
    assert!((m2 - 14.0 / 3.0).abs() < 1e-15);
    let (_, m2) = moment_estimates(&[1.0, 2.0, 3.0], 1.0).unwrap();
    assert!((m2 - 11.0 / 3.0).abs() < 1e-15);
    assert_eq!(moment_estimates(&[2.5; 4], 0.0).unwrap(), (2.5, 6.25));
}

#[test]
fn choose_b_examples() {
    assert_eq!(choose_b(3000, 1.0, 1.0 / 12.0, 0.1).unwrap(), 197);
    assert_eq!(choose_b(3000, 0.01, 1.0 / 12.0, 0.1).unwrap(), 20);
    assert_eq!(choose_b(3000, 1.0, 0.0, 0.1).unwrap(), 20);
    assert_eq!(choose_b(3000, 1.0, 0.0, 0.05).unwrap(), 40);
}

#[test]
fn snr_feasibility() {
    assert!((SNR_BOUND - 91.0253604713123).abs() < 1e-10);
    assert!(snr_feasible(3000, 1.0, 1.0 / 12.0));
    assert!(!snr_feasible(3000, 0.1, 1.0 / 12.0));
}

#[test]
fn percentile_of_uniform_grid() {
    let x: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
    let d = RecoveredDensity::new(x, vec![1.0; 101]).unwrap();
    let ci = percentile_ci(&d, 0.9).unwrap();
    assert!((ci.lower - 0.05).abs() <= 0.01, "{ci:?}");
    assert!((ci.upper - 0.95).abs() <= 0.01, "{ci:?}");
    assert_eq!(ci.method, CiMethod::Percentile);
    // cdf inverts quantile inside cells
    for q in [0.1, 0.37, 0.5, 0.93] {
        assert!((d.cdf(d.quantile(q)) - q).abs() < 1e-12);
    }
}

#[test]
fn percentile_of_point_mass() {
    let d = RecoveredDensity::point_mass(0.3);
    let ci = percentile_ci(&d, 0.9).unwrap();
    assert_eq!((ci.lower, ci.upper), (0.3, 0.3));
}

#[test]
fn density_estimation_without_noise() {
    let y = normals(10_000, 11);
    let d = deconvolve_mle(&y, 0.0, &DeconvConfig::default()).unwrap();
    assert!(d.mean().abs() < 0.05, "mean {}", d.mean());
    assert!((d.variance() - 1.0).abs() < 0.1, "variance {}", d.variance());
    let total: f64 = d.mass().iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn deconvolution_removes_known_noise() {
    // the norm penalty shrinks toward a flat density, so single fits run wide;
    // average a few replicates
    let mut total = 0.0;
    for seed in 0..5u64 {
        let x = normals(1000, 100 + seed);
        let e = normals(1000, 200 + seed);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + b).collect();
        let fit = deconvolve_mle_fit(&y, 1.0, &DeconvConfig::default()).unwrap();
        assert!(fit.converged, "{fit:?}");
        total += fit.density.variance();
    }
    let v = total / 5.0;
    assert!((v - 1.0).abs() < 0.3, "variance {v}");
}

#[test]
fn zero_range_input_gives_point_mass() {
    let fit = deconvolve_mle_fit(&[0.7; 20], 0.5, &DeconvConfig::default()).unwrap();
    assert_eq!(fit.density.support(), &[0.7]);
    assert_eq!(fit.warnings, vec!["degenerate_input".to_string()]);
}

#[test]
fn too_few_observations() {
    let r = deconvolve_mle(&[0.0, 1.0, 2.0], 0.0, &DeconvConfig::default());
    assert!(matches!(r, Err(crate::DpError::InsufficientData(_))));
}

#[test]
fn hessian_matches_finite_differences_of_gradient() {
    let y: Vec<f64> = normals(300, 14).iter().map(|v| 0.5 + 0.1 * v).collect();
    let lik = PenalizedLikelihood::new(&y, 0.002, &DeconvConfig::default()).unwrap();
    let alpha = [0.4, -1.2, 0.8, 0.3, -0.5];
    let h = lik.hessian(&alpha);
    let step = 1e-5;
    for j in 0..5 {
        let mut up = alpha;
        let mut dn = alpha;
        up[j] += step;
        dn[j] -= step;
        let (gu, gd) = (lik.gradient(&up), lik.gradient(&dn));
        for i in 0..5 {
            let fd = (gu[i] - gd[i]) / (2.0 * step);
            assert!((fd - h[(i, j)]).abs() <= 1e-5 * (1.0 + fd.abs()), "({i},{j}) {fd} vs {}", h[(i, j)]);
        }
    }
}

#[test]
fn se_is_zero_for_constant_estimates() {
    let est = estimate_with_se(&output(vec![0.4; 50], 0.0, 100, f64::INFINITY)).unwrap();
    assert!((est.point - 0.4).abs() < 1e-15);
    assert!(est.se < 1e-12);
}

#[test]
fn se_clamps_under_noise_floor() {
    let ys: Vec<f64> = (0..20).map(|i| 0.5 + 0.001 * (i % 2) as f64).collect();
    let out = output(ys, 1.0, 100, 1.0);
    let est = estimate_with_se(&out).unwrap();
    assert!(est.clamped && est.se == 0.0);
    let ci = t_ci_adjusted(&out, 0.9, &DeconvConfig::default()).unwrap();
    assert_eq!(ci.method, CiMethod::Percentile);
    assert!(ci.flags.iter().any(|f| f == "percentile_fallback"));
}

#[test]
fn t_interval_without_noise_uses_b_minus_one_dof() {
    let ys: Vec<f64> = normals(30, 15).iter().map(|v| 0.5 + 0.01 * v).collect();
    let n = 1_000_000;
    let out = output(ys.clone(), 0.0, n, f64::INFINITY);
    let ci = t_ci_adjusted(&out, 0.9, &DeconvConfig::default()).unwrap();
    let est = estimate_with_se(&out).unwrap();
    let nf = n as f64;
    let df = (nf / (nf - 1.0)).powi(2) * 29.0;
    let t = crate::normal::t_quantile(0.95, df);
    assert_eq!(ci.method, CiMethod::TAdjusted);
    assert!((ci.upper - (est.point + t * est.se)).abs() < 1e-14);
    // t with 29 dof at 0.95
    assert!((t - 1.6991270265334972).abs() < 1e-5);
}
