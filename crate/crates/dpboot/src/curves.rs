//! Tradeoff curves for plotting: the bootstrap bound, the composed bound
//! against its Gaussian limit, and explicit worst-case pairs.

use crate::error::Result;
use dpboot_core::accountant::{
    boot_curve, boot_factor, compose_boot_profile, occupancy_probs, worst_case_pair_curve,
    ComposeConfig, TAIL_MASS,
};
use dpboot_core::tradeoff::export::alpha_grid;
use dpboot_core::tradeoff::TradeoffCurve;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    BootBound,
    ComposedVsGdp,
    WorstCasePairs,
}

impl std::str::FromStr for CurveKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "boot_bound" => Ok(CurveKind::BootBound),
            "composed_vs_gdp" => Ok(CurveKind::ComposedVsGdp),
            "worst_case_pairs" => Ok(CurveKind::WorstCasePairs),
            _ => Err(format!("unknown curve kind `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    /// Per-release GDP parameter, or the total for `composed_vs_gdp`.
    pub mu: f64,
    pub n: u64,
    #[serde(rename = "B")]
    pub b: u64,
    /// Values of `a` for the worst-case pairs.
    pub a: Vec<f64>,
    /// Number of alpha intervals on the output grid.
    pub points: usize,
}

impl Default for CurveParams {
    fn default() -> Self {
        Self { mu: 1.0, n: 1000, b: 500, a: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0], points: 200 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedCurve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn sampled(name: &str, f: impl Fn(f64) -> f64, points: usize) -> NamedCurve {
    NamedCurve { name: name.to_string(), points: alpha_grid(points).into_iter().map(|a| (a, f(a))).collect() }
}

pub fn emit_curve(kind: CurveKind, p: &CurveParams) -> Result<Vec<NamedCurve>> {
    match kind {
        CurveKind::BootBound => {
            let bc = boot_curve(p.mu, p.n)?;
            Ok(vec![sampled("boot_bound", |a| bc.value(a), p.points)])
        }
        CurveKind::ComposedVsGdp => {
            let mu_b = p.mu / (p.b as f64).sqrt();
            let prof = compose_boot_profile(mu_b, p.n, p.b, &ComposeConfig::default())?;
            let composed = NamedCurve { name: "composed".into(), points: prof.tradeoff(&alpha_grid(p.points))? };
            let g = TradeoffCurve::gdp(boot_factor(None) * p.mu)?;
            Ok(vec![composed, sampled("gdp", |a| g.value(a), p.points)])
        }
        CurveKind::WorstCasePairs => {
            let bc = boot_curve(p.mu, p.n)?;
            let imax = occupancy_probs(p.n)?.truncation_index(TAIL_MASS) as f64;
            // thresholds z = C n mu, spanning both tails of every component
            let (lo, hi) = (-12.0 - imax * p.mu, 12.0 + imax * p.mu);
            let k = 20 * p.points.max(1);
            let zs: Vec<f64> = (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect();
            let mut out = Vec::new();
            for &a in &p.a {
                let mut pts = worst_case_pair_curve(p.mu, p.n, a, &zs)?;
                pts.sort_by(|x, y| x.0.total_cmp(&y.0));
                out.push(NamedCurve { name: format!("worst_case_a{a}"), points: pts });
            }
            out.push(sampled("boot_bound", |a| bc.value(a), p.points));
            let g = TradeoffCurve::gdp(p.mu)?;
            out.push(sampled("gdp", |a| g.value(a), p.points));
            Ok(out)
        }
    }
}
