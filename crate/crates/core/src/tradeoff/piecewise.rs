// Convex piecewise-linear curves on [0,1], used by the (ε,δ) and tabulated kinds.

use super::SupportSet;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl PiecewiseLinear {
    /// Vertices must be strictly increasing in x with non-decreasing slopes.
    /// Segments with equal slope are merged.
    pub(crate) fn from_vertices(xs: Vec<f64>, ys: Vec<f64>, slopes: Option<Vec<f64>>) -> Self {
        let slopes = slopes.unwrap_or_else(|| {
            xs.windows(2)
                .zip(ys.windows(2))
                .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
                .collect()
        });
        let mut out_x = vec![xs[0]];
        let mut out_y = vec![ys[0]];
        let mut out_s: Vec<f64> = Vec::new();
        for i in 0..slopes.len() {
            if xs[i + 1] <= xs[i] {
                continue;
            }
            if let Some(&last) = out_s.last() {
                if last == slopes[i] {
                    *out_x.last_mut().unwrap() = xs[i + 1];
                    *out_y.last_mut().unwrap() = ys[i + 1];
                    continue;
                }
            }
            out_x.push(xs[i + 1]);
            out_y.push(ys[i + 1]);
            out_s.push(slopes[i]);
        }
        PiecewiseLinear {
            xs: out_x,
            ys: out_y,
            slopes: out_s,
        }
    }

    /// Lower convex hull of points sorted by x.
    pub(crate) fn lower_hull(points: &[(f64, f64)]) -> Self {
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for &p in points {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let (xs, ys) = hull.into_iter().unzip();
        Self::from_vertices(xs, ys, None)
    }

    pub(crate) fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, alpha: f64) -> usize {
        // index j with xs[j] <= alpha <= xs[j+1]
        let k = self.xs.partition_point(|&x| x <= alpha);
        k.saturating_sub(1).min(self.slopes.len().saturating_sub(1))
    }

    pub(crate) fn value(&self, alpha: f64) -> f64 {
        if self.slopes.is_empty() {
            return self.ys[0];
        }
        let j = self.segment(alpha);
        let (x0, x1, y0, y1) = (self.xs[j], self.xs[j + 1], self.ys[j], self.ys[j + 1]);
        if alpha <= x0 {
            return y0;
        }
        if alpha >= x1 {
            return y1;
        }
        y0 + (y1 - y0) * (alpha - x0) / (x1 - x0)
    }

    pub(crate) fn subdiff(&self, alpha: f64) -> (f64, f64) {
        let n = self.slopes.len();
        if n == 0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if alpha <= self.xs[0] {
            return (f64::NEG_INFINITY, self.slopes[0]);
        }
        if alpha >= self.xs[n] {
            return (self.slopes[n - 1], 0.0);
        }
        let k = self.xs.partition_point(|&x| x < alpha);
        if self.xs[k] == alpha {
            (self.slopes[k - 1], self.slopes[k])
        } else {
            (self.slopes[k - 1], self.slopes[k - 1])
        }
    }

    pub(crate) fn support(&self, c: f64) -> SupportSet {
        let n = self.slopes.len();
        if n == 0 {
            return SupportSet::point(self.xs[0], self.ys[0]);
        }
        let j = self.slopes.partition_point(|&s| s < c);
        if j == n {
            return SupportSet::point(self.xs[n], self.ys[n]);
        }
        if self.slopes[j] == c {
            SupportSet {
                alpha_lo: self.xs[j],
                alpha_hi: self.xs[j + 1],
                beta_lo: self.ys[j],
            }
        } else {
            SupportSet::point(self.xs[j], self.ys[j])
        }
    }
}
