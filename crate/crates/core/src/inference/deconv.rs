use super::spline::standardized_basis;
use crate::error::{domain, DpError, Result};
use crate::normal;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeconvConfig {
    /// Number of support points.
    pub m: usize,
    /// Spline degrees of freedom.
    pub p: usize,
    /// Penalty scale on the coefficient norm.
    pub c0: f64,
    /// Grid extension past the data range, in noise standard deviations.
    pub grid_pad: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for DeconvConfig {
    fn default() -> Self {
        Self { m: 101, p: 5, c0: 1.0, grid_pad: 3.0, max_iter: 500, grad_tol: 1e-6 }
    }
}

impl DeconvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 10 {
            return Err(domain(format!("grid size m = {} must be at least 10", self.m)));
        }
        if self.p < 3 || self.p >= self.m {
            return Err(domain(format!("spline dof p = {} must be in [3, m)", self.p)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(domain("penalty scale c0 must be positive"));
        }
        if !(self.grid_pad >= 0.0 && self.grid_pad.is_finite()) {
            return Err(domain("grid_pad must be a nonnegative number"));
        }
        Ok(())
    }
}

/// Discrete distribution on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredDensity {
    support: Vec<f64>,
    mass: Vec<f64>,
}

impl RecoveredDensity {
    /// Masses are renormalized; they must be nonnegative with positive total.
    pub fn new(support: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != mass.len() {
            return Err(domain("support and mass must be nonempty and of equal length"));
        }
        if support.windows(2).any(|w| !(w[1] > w[0])) || support.iter().any(|x| !x.is_finite()) {
            return Err(domain("support must be finite and strictly increasing"));
        }
        if mass.iter().any(|&f| !(f >= 0.0) || !f.is_finite()) {
            return Err(domain("masses must be finite and nonnegative"));
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0) {
            return Err(domain("masses sum to zero"));
        }
        let mass = mass.into_iter().map(|f| f / total).collect();
        Ok(Self { support, mass })
    }

    pub fn point_mass(x: f64) -> Self {
        Self { support: vec![x], mass: vec![1.0] }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.mass).map(|(x, f)| x * f).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support.iter().zip(&self.mass).map(|(x, f)| f * (x - m) * (x - m)).sum()
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.mass
            .iter()
            .map(|f| {
                acc += f;
                acc
            })
            .collect()
    }

    /// Smallest grid cell whose cumulative mass reaches `q`, interpolated
    /// linearly between the previous support point and that one.
    pub fn quantile(&self, q: f64) -> f64 {
        let cum = self.cumulative();
        let q = q.clamp(0.0, 1.0);
        let tol = 1e-12;
        let j = cum.iter().position(|&c| c >= q - tol).unwrap_or(cum.len() - 1);
        if j == 0 {
            return self.support[0];
        }
        let (f0, f1) = (cum[j - 1], cum[j]);
        let (x0, x1) = (self.support[j - 1], self.support[j]);
        if f1 - f0 <= 0.0 {
            return x1;
        }
        let t = ((q - f0) / (f1 - f0)).clamp(0.0, 1.0);
        x0 + t * (x1 - x0)
    }

    /// Inverse of [`quantile`](Self::quantile) between support points.
    pub fn cdf(&self, theta: f64) -> f64 {
        let s = &self.support;
        if theta < s[0] {
            return 0.0;
        }
        if theta >= s[s.len() - 1] {
            return 1.0;
        }
        let cum = self.cumulative();
        let j = s.partition_point(|&x| x <= theta);
        let (x0, x1) = (s[j - 1], s[j]);
        let t = (theta - x0) / (x1 - x0);
        cum[j - 1] + t * (cum[j] - cum[j - 1])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,mass")?;
        for (x, f) in self.support.iter().zip(&self.mass) {
            writeln!(w, "{x},{f}")?;
        }
        Ok(())
    }
}

/// Binned Gaussian-convolution log-likelihood of a spline exponential family,
/// minus `c0 * |alpha|`.
#[derive(Clone, Debug)]
pub struct PenalizedLikelihood {
    support: Vec<f64>,
    q: DMatrix<f64>,
    // rows: occupied bins, columns: support points
    p: DMatrix<f64>,
    counts: DVector<f64>,
    total: f64,
    c0: f64,
}

struct Eval {
    f: DVector<f64>,
    g: DVector<f64>,
}

impl PenalizedLikelihood {
    /// Builds the grid and design. `y` must have positive range.
    pub fn new(y: &[f64], sigma2: f64, cfg: &DeconvConfig) -> Result<Self> {
        cfg.validate()?;
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(domain("noise variance must be finite and nonnegative"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(domain("observations must be finite"));
        }
        let (lo, hi) = min_max(y);
        if !(hi > lo) {
            return Err(domain("observations have zero range"));
        }
        let sigma = sigma2.sqrt();
        let (a, b) = (lo - cfg.grid_pad * sigma, hi + cfg.grid_pad * sigma);
        let m = cfg.m;
        let h = (b - a) / (m - 1) as f64;
        let support: Vec<f64> = (0..m).map(|j| a + h * j as f64).collect();

        let mut bins = vec![0.0; m];
        for &v in y {
            let k = ((v - a) / h).round().clamp(0.0, (m - 1) as f64) as usize;
            bins[k] += 1.0;
        }
        let occupied: Vec<usize> = (0..m).filter(|&k| bins[k] > 0.0).collect();
        let counts = DVector::from_iterator(occupied.len(), occupied.iter().map(|&k| bins[k]));

        let mut p = DMatrix::zeros(occupied.len(), m);
        for (r, &k) in occupied.iter().enumerate() {
            let lower = if k == 0 { f64::NEG_INFINITY } else { support[k] - h / 2.0 };
            let upper = if k == m - 1 { f64::INFINITY } else { support[k] + h / 2.0 };
            for (j, &x) in support.iter().enumerate() {
                p[(r, j)] = if sigma > 0.0 {
                    bin_mass((lower - x) / sigma, (upper - x) / sigma)
                } else if j == k {
                    1.0
                } else {
                    0.0
                };
            }
        }
        let q = standardized_basis(&support, cfg.p)?;
        Ok(Self { support, q, p, counts, total: y.len() as f64, c0: cfg.c0 })
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn density(&self, alpha: &[f64]) -> Vec<f64> {
        self.eval(alpha).f.iter().copied().collect()
    }

    fn eval(&self, alpha: &[f64]) -> Eval {
        let eta = &self.q * DVector::from_column_slice(alpha);
        let top = eta.max();
        let mut f = eta.map(|e| (e - top).exp());
        let s = f.sum();
        f /= s;
        let g = &self.p * &f;
        Eval { f, g }
    }

    pub fn value(&self, alpha: &[f64]) -> f64 {
        let e = self.eval(alpha);
        let ll: f64 = self.counts.iter().zip(e.g.iter()).map(|(y, g)| y * g.ln()).sum();
        ll - self.c0 * norm(alpha)
    }

    fn u_vec(&self, e: &Eval) -> DVector<f64> {
        let ratio = self.counts.component_div(&e.g);
        self.p.tr_mul(&ratio)
    }

    pub fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let e = self.eval(alpha);
        let u = self.u_vec(&e);
        let w = e.f.component_mul(&u.add_scalar(-self.total));
        let mut grad = self.q.tr_mul(&w);
        let n = norm(alpha);
        if n > 0.0 {
            grad.axpy(-self.c0 / n, &DVector::from_column_slice(alpha), 1.0);
        }
        grad.iter().copied().collect()
    }

    pub fn hessian(&self, alpha: &[f64]) -> DMatrix<f64> {
        let e = self.eval(alpha);
        let u = self.u_vec(&e);
        let qbar = self.q.tr_mul(&e.f);
        // d f / d alpha
        let mut d = self.q.clone();
        for mut row in d.row_iter_mut() {
            row -= qbar.transpose();
        }
        for (j, mut row) in d.row_iter_mut().enumerate() {
            row *= e.f[j];
        }
        let pd = &self.p * &d;
        let mut scaled = pd.clone();
        for (k, mut row) in scaled.row_iter_mut().enumerate() {
            row *= self.counts[k] / (e.g[k] * e.g[k]);
        }
        let du = -self.p.tr_mul(&scaled);
        let mut dw = d.clone();
        for (j, mut row) in dw.row_iter_mut().enumerate() {
            row *= u[j] - self.total;
        }
        for j in 0..dw.nrows() {
            for c in 0..dw.ncols() {
                dw[(j, c)] += e.f[j] * du[(j, c)];
            }
        }
        let mut h = self.q.tr_mul(&dw);
        h = (&h + h.transpose()) * 0.5;
        let n = norm(alpha);
        if n > 0.0 {
            let a = DVector::from_column_slice(alpha);
            let pen = (DMatrix::identity(a.len(), a.len()) / n - &a * a.transpose() / (n * n * n))
                * self.c0;
            h -= pen;
        }
        h
    }
}

fn bin_mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        normal::sf(a) - normal::sf(b)
    } else {
        normal::cdf(b) - normal::cdf(a)
    }
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn min_max(y: &[f64]) -> (f64, f64) {
    y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[derive(Clone, Debug)]
pub struct DeconvFit {
    pub density: RecoveredDensity,
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub warnings: Vec<String>,
}

/// Penalized-MLE deconvolution of `y = x + N(0, sigma2)` on a grid.
pub fn deconvolve_mle(y: &[f64], sigma2: f64, cfg: &DeconvConfig) -> Result<RecoveredDensity> {
    deconvolve_mle_fit(y, sigma2, cfg).map(|fit| fit.density)
}

pub fn deconvolve_mle_fit(y: &[f64], sigma2: f64, cfg: &DeconvConfig) -> Result<DeconvFit> {
    cfg.validate()?;
    if y.len() < 10 {
        return Err(DpError::InsufficientData(format!(
            "deconvolution needs at least 10 observations, got {}",
            y.len()
        )));
    }
    let (lo, hi) = min_max(y);
    if lo.is_finite() && lo == hi {
        log::warn!("deconvolution input has zero range; returning a point mass");
        return Ok(DeconvFit {
            density: RecoveredDensity::point_mass(lo),
            alpha: vec![],
            iterations: 0,
            converged: true,
            grad_norm: 0.0,
            warnings: vec!["degenerate_input".into()],
        });
    }
    let lik = PenalizedLikelihood::new(y, sigma2, cfg)?;
    let p = lik.dim();
    let mut alpha = vec![1.0; p];
    let mut value = lik.value(&alpha);
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    while iterations < cfg.max_iter {
        let grad = DVector::from_vec(lik.gradient(&alpha));
        grad_norm = grad.amax();
        if grad_norm <= cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let neg_h = -lik.hessian(&alpha);
        let step = newton_direction(neg_h, &grad);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-12 {
            let trial: Vec<f64> = alpha.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let v = lik.value(&trial);
            if v.is_finite() && v >= value - 1e-12 * value.abs() {
                moved = v > value || t == 1.0;
                alpha = trial;
                value = v;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if !converged {
        let grad = DVector::from_vec(lik.gradient(&alpha));
        grad_norm = grad.amax();
        converged = grad_norm <= cfg.grad_tol;
    }
    if !converged {
        log::warn!("deconvolution stopped after {iterations} iterations, gradient {grad_norm:.3e}");
        warnings.push("not_converged".into());
    }
    let density = RecoveredDensity::new(lik.support().to_vec(), lik.density(&alpha))?;
    Ok(DeconvFit { density, alpha, iterations, converged, grad_norm, warnings })
}

// Solves (-H) d = g, shifting the diagonal until -H is positive definite.
fn newton_direction(neg_h: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let scale = neg_h.diagonal().amax().max(1e-12);
    let mut shift = 0.0;
    loop {
        let mut a = neg_h.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += shift;
        }
        if let Some(ch) = a.cholesky() {
            return ch.solve(grad);
        }
        shift = if shift == 0.0 { 1e-8 * scale } else { shift * 10.0 };
        if shift > 1e12 * scale {
            return grad / scale;
        }
    }
}
