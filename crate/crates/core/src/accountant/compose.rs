// Numeric B-fold composition of the bootstrap bound.
//
// One release is dominated by the pair (P, Q_p) with Q_p = p0 P + (1 - p0) Q,
// where P and Q are Gaussian mixtures whose log density ratio log(dQ/dP)(x)
// is x itself. The privacy loss of one release is therefore an explicit
// monotone transform of a mixture variable, and the B-fold loss is a sum of
// i.i.d. copies. Its law is discretized on a uniform grid and convolved by
// FFT; delta is then an exact finite sum over that grid.

use super::occupancy::{occupancy_probs, TAIL_MASS};
use crate::error::{domain, DpError, Result};
use crate::normal;
use crate::tradeoff::{fdp_from_profile, PrivacyProfile};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::sync::Arc;

/// Numerical settings for [`compose_boot_profile`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComposeConfig {
    /// Largest number of releases accepted.
    pub b_cap: u64,
    /// Grid size of the first pass.
    pub initial_points: usize,
    /// Grid size at which refinement stops even if the check still fails.
    pub max_points: usize,
    /// Refinement stops once doubling the grid moves delta by less than this.
    pub self_check_tol: f64,
}

impl Default for ComposeConfig {
    fn default() -> Self {
        ComposeConfig {
            b_cap: 5000,
            initial_points: 4096,
            max_points: 1 << 21,
            self_check_tol: 1e-6,
        }
    }
}

// Sum-of-losses law on the grid s_j = start + j h.
#[derive(Clone, Debug)]
struct LossLaw {
    start: f64,
    h: f64,
    inf_mass: f64,
    // tail[j] = sum_{k >= j} w_k
    tail: Vec<f64>,
    // scaled[j] = sum_{k >= j} w_k exp(s_j - s_k)
    scaled: Vec<f64>,
}

impl LossLaw {
    fn from_masses(start: f64, h: f64, masses: &[f64], inf_mass: f64) -> Self {
        let n = masses.len();
        let mut tail = vec![0.0; n + 1];
        let mut scaled = vec![0.0; n + 1];
        let decay = (-h).exp();
        for j in (0..n).rev() {
            tail[j] = tail[j + 1] + masses[j];
            scaled[j] = masses[j] + decay * scaled[j + 1];
        }
        LossLaw {
            start,
            h,
            inf_mass,
            tail,
            scaled,
        }
    }

    // E[(1 - e^{eps - S})_+] plus the mass at infinite loss
    fn delta(&self, eps: f64) -> f64 {
        let n = self.tail.len() - 1;
        let s = |j: usize| self.start + j as f64 * self.h;
        let guess = ((eps - self.start) / self.h).floor() + 1.0;
        let mut j = guess.clamp(0.0, n as f64) as usize;
        while j > 0 && s(j - 1) > eps {
            j -= 1;
        }
        while j < n && s(j) <= eps {
            j += 1;
        }
        let body = if j == n {
            0.0
        } else {
            self.tail[j] - (eps - s(j)).exp() * self.scaled[j]
        };
        (self.inf_mass + body.max(0.0)).clamp(0.0, 1.0)
    }
}

// Gaussian mixture components N(-m_i, v_i) for P and N(+m_i, v_i) for Q.
struct PairMixture {
    weights: Vec<f64>,
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl PairMixture {
    // (cdf, sf) of P shifted by `sign` (-1 for P, +1 for Q)
    fn cdf_sf(&self, x: f64, sign: f64) -> (f64, f64) {
        if x == f64::INFINITY {
            return (1.0, 0.0);
        }
        if x == f64::NEG_INFINITY {
            return (0.0, 1.0);
        }
        let (mut lo, mut hi) = (0.0, 0.0);
        for ((w, m), s) in self.weights.iter().zip(&self.shift).zip(&self.scale) {
            let z = (x - sign * m) / s;
            if z < 0.0 {
                let c = normal::cdf(z);
                lo += w * c;
                hi += w * (1.0 - c);
            } else {
                let t = normal::sf(z);
                lo += w * (1.0 - t);
                hi += w * t;
            }
        }
        (lo, hi)
    }
}

#[derive(Clone, Copy)]
enum Ordering {
    // X ~ Q_p, loss = log(p0 + (1 - p0) e^X)
    Forward,
    // X ~ P, loss = -log(p0 + (1 - p0) e^X)
    Reverse,
}

struct Setup {
    mix: PairMixture,
    p0: f64,
    half_width: f64,
}

impl Setup {
    // x with log(p0 + (1 - p0) e^x) = s, or -inf when s <= log p0
    fn threshold(&self, s: f64) -> f64 {
        if self.p0 > 0.0 && s <= self.p0.ln() {
            return f64::NEG_INFINITY;
        }
        s + (-self.p0 * (-s).exp()).ln_1p() - (-self.p0).ln_1p()
    }

    // (P(L <= s), P(L > s))
    fn loss_cdf_sf(&self, ord: Ordering, s: f64) -> (f64, f64) {
        match ord {
            Ordering::Forward => {
                let x = self.threshold(s);
                let (pc, ps) = self.mix.cdf_sf(x, -1.0);
                let (qc, qs) = self.mix.cdf_sf(x, 1.0);
                (
                    self.p0 * pc + (1.0 - self.p0) * qc,
                    self.p0 * ps + (1.0 - self.p0) * qs,
                )
            }
            Ordering::Reverse => {
                let x = self.threshold(-s);
                let (pc, ps) = self.mix.cdf_sf(x, -1.0);
                (ps, pc)
            }
        }
    }

    fn law(&self, ord: Ordering, points: usize, b: u64) -> LossLaw {
        let l = self.half_width;
        let h = 2.0 * l / points as f64;
        let edges: Vec<(f64, f64)> = (0..points)
            .map(|j| self.loss_cdf_sf(ord, -l + (j as f64 + 0.5) * h))
            .collect();
        let mut masses = vec![0.0; points];
        for j in 0..points {
            let (c, sf) = edges[j];
            masses[j] = if j == 0 {
                c
            } else if c <= 0.5 {
                c - edges[j - 1].0
            } else {
                edges[j - 1].1 - sf
            }
            .max(0.0);
        }
        let inf_single = edges[points - 1].1;
        if b == 1 {
            return LossLaw::from_masses(-l, h, &masses, inf_single);
        }
        let composed = convolve_power(&masses, b);
        let inf_mass = 1.0 - (1.0 - inf_single).powf(b as f64);
        LossLaw::from_masses(-l, h, &composed, inf_mass)
    }
}

// B-fold circular self-convolution, re-centred so index j stays at -L + j h.
fn convolve_power(masses: &[f64], b: u64) -> Vec<f64> {
    let n = masses.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = masses.iter().map(|&m| Complex::new(m, 0.0)).collect();
    fwd.process(&mut buf);
    for z in buf.iter_mut() {
        *z = pow_complex(*z, b);
    }
    inv.process(&mut buf);
    let shift = ((b - 1) as u128 * (n as u128 / 2) % n as u128) as usize;
    let scale = 1.0 / n as f64;
    (0..n)
        .map(|j| (buf[(j + shift) % n].re * scale).max(0.0))
        .collect()
}

fn pow_complex(mut z: Complex<f64>, mut e: u64) -> Complex<f64> {
    let mut acc = Complex::new(1.0, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= z;
        }
        z *= z;
        e >>= 1;
    }
    acc
}

/// Privacy profile of `B` composed bootstrap releases, each `mu_b`-GDP on
/// resampled data of size `n`.
#[derive(Clone, Debug)]
pub struct ComposedProfile {
    pub mu_b: f64,
    pub n: u64,
    pub b: u64,
    /// Grid size of the returned result.
    pub grid_points: usize,
    /// Largest delta change seen in the last grid doubling.
    pub self_check_gap: f64,
    laws: Arc<[LossLaw; 2]>,
}

impl ComposedProfile {
    pub fn delta(&self, eps: f64) -> f64 {
        self.laws[0].delta(eps).max(self.laws[1].delta(eps))
    }

    pub fn to_privacy_profile(&self) -> PrivacyProfile {
        let me = self.clone();
        PrivacyProfile::from_fn(move |e| me.delta(e))
    }

    /// Composed tradeoff value at each alpha.
    pub fn tradeoff(&self, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
        let prof = self.to_privacy_profile();
        alphas
            .iter()
            .map(|&a| Ok((a, fdp_from_profile(&prof, a)?)))
            .collect()
    }
}

const CHECK_EPS: [f64; 9] = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0];

/// Compose `B` bootstrap releases numerically. The grid is doubled until
/// delta moves by less than `cfg.self_check_tol` on a fixed set of epsilons.
pub fn compose_boot_profile(mu_b: f64, n: u64, b: u64, cfg: &ComposeConfig) -> Result<ComposedProfile> {
    if !(mu_b > 0.0) || !mu_b.is_finite() {
        return Err(domain(format!("per-release mu must be finite and > 0, got {mu_b}")));
    }
    if b == 0 {
        return Err(domain("B must be at least 1"));
    }
    if b > cfg.b_cap {
        return Err(DpError::Resource(format!(
            "B = {b} exceeds the composition cap {}; use the asymptotic rule mu = sqrt(2 - 2/e) sqrt(B) mu_b instead",
            cfg.b_cap
        )));
    }
    let occ = occupancy_probs(n)?;
    let weights = occ.positive_weights(TAIL_MASS);
    let i_max = weights.len();
    let scale: Vec<f64> = (1..=i_max).map(|i| i as f64 * mu_b).collect();
    let shift: Vec<f64> = scale.iter().map(|s| s * s / 2.0).collect();
    let setup = Setup {
        mix: PairMixture {
            weights,
            shift,
            scale,
        },
        p0: occ.p0(),
        half_width: i_max as f64 * mu_b * 10.0 + 20.0,
    };
    let build = |points: usize| -> [LossLaw; 2] {
        let (a, r) = rayon::join(
            || setup.law(Ordering::Forward, points, b),
            || setup.law(Ordering::Reverse, points, b),
        );
        [a, r]
    };
    let eval = |laws: &[LossLaw; 2]| -> Vec<f64> {
        CHECK_EPS
            .iter()
            .map(|&e| laws[0].delta(e).max(laws[1].delta(e)))
            .collect()
    };
    let mut points = cfg.initial_points.max(16).next_power_of_two();
    let mut coarse_vals = eval(&build(points));
    loop {
        let fine_points = points * 2;
        let fine = build(fine_points);
        let fine_vals = eval(&fine);
        let gap = coarse_vals
            .iter()
            .zip(&fine_vals)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap < cfg.self_check_tol || fine_points >= cfg.max_points {
            if gap >= cfg.self_check_tol {
                log::warn!(
                    "composition grid stopped at {fine_points} points with self-check gap {gap:.3e}"
                );
            }
            return Ok(ComposedProfile {
                mu_b,
                n,
                b,
                grid_points: fine_points,
                self_check_gap: gap,
                laws: Arc::new(fine),
            });
        }
        points = fine_points;
        coarse_vals = fine_vals;
    }
}

/// Delta at `eps` of `B` composed bootstrap releases with default settings.
pub fn compose_boot_delta(mu_b: f64, n: u64, b: u64, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(domain(format!("epsilon must be >= 0, got {eps}")));
    }
    Ok(compose_boot_profile(mu_b, n, b, &ComposeConfig::default())?.delta(eps))
}
