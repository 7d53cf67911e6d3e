//! CSV export of sampled curves.

use std::io::{self, Write};

/// Decimal rendering with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).clamp(0, 40) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

/// Write `alpha,beta` rows with 10 significant digits.
pub fn write_curve_csv<W: Write>(mut w: W, points: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "alpha,beta")?;
    for &(a, b) in points {
        writeln!(w, "{},{}", format_sig(a, 10), format_sig(b, 10))?;
    }
    Ok(())
}

/// `n + 1` equispaced alphas on [0, 1].
pub fn alpha_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}
