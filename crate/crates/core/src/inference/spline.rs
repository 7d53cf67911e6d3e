use crate::error::{domain, Result};
use nalgebra::DMatrix;

// type-7 quantile of sorted data
fn quantile_sorted(x: &[f64], q: f64) -> f64 {
    let h = (x.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(x.len() - 1);
    x[lo] + (h - lo as f64) * (x[hi] - x[lo])
}

/// Natural cubic spline basis without intercept: `df` columns, with
/// `df + 1` knots at equispaced quantiles of `x` (boundary knots at the
/// extremes). Uses the truncated-power construction on `x` rescaled to [0, 1].
pub fn natural_spline_basis(x: &[f64], df: usize) -> Result<DMatrix<f64>> {
    if df < 1 {
        return Err(domain("spline needs at least one degree of freedom"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if !(hi > lo) {
        return Err(domain("spline support has zero width"));
    }
    let scale = |v: f64| (v - lo) / (hi - lo);
    let knots: Vec<f64> = (0..=df)
        .map(|k| scale(quantile_sorted(&sorted, k as f64 / df as f64)))
        .collect();
    let last = knots[df];
    let cube = |v: f64| if v > 0.0 { v * v * v } else { 0.0 };
    let d = |k: usize, u: f64| (cube(u - knots[k]) - cube(u - last)) / (last - knots[k]);
    let mut basis = DMatrix::zeros(x.len(), df);
    for (r, &v) in x.iter().enumerate() {
        let u = scale(v);
        basis[(r, 0)] = u;
        for k in 0..df.saturating_sub(1) {
            basis[(r, k + 1)] = d(k, u) - d(df - 1, u);
        }
    }
    Ok(basis)
}

/// Spline basis with centered, orthonormal columns (modified Gram-Schmidt).
pub fn standardized_basis(x: &[f64], df: usize) -> Result<DMatrix<f64>> {
    let mut q = natural_spline_basis(x, df)?;
    let rows = q.nrows() as f64;
    for mut col in q.column_iter_mut() {
        let mean = col.sum() / rows;
        col.add_scalar_mut(-mean);
    }
    for j in 0..df {
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let prev = q.column(k).clone_owned();
            q.column_mut(j).axpy(-proj, &prev, 1.0);
        }
        let norm = q.column(j).norm();
        if !(norm > 1e-12) {
            return Err(domain("spline basis is rank deficient on this grid"));
        }
        q.column_mut(j).unscale_mut(norm);
    }
    Ok(q)
}
