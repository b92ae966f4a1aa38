//! Tabulated distribution: a cdf given as sample points `(v, F(v))`,
//! interpolated by a monotone piecewise cubic (Fritsch-Carlson slopes).
//!
//! The table must start at `F = 0`, end at `F = 1`, and be strictly
//! increasing in both columns; the interpolant then stays a valid cdf and
//! its derivative serves as the density.

use super::DistError;
use crate::numeric::root;

#[derive(Debug, Clone)]
pub struct Tabulated {
    v: Vec<f64>,
    f: Vec<f64>,
    /// Endpoint-clamped monotone slopes dF/dv at the knots.
    m: Vec<f64>,
}

impl Tabulated {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, DistError> {
        if points.len() < 3 {
            return Err(DistError::InvalidParameter(
                "tabulated cdf needs at least 3 points".into(),
            ));
        }
        let v: Vec<f64> = points.iter().map(|p| p.0).collect();
        let f: Vec<f64> = points.iter().map(|p| p.1).collect();
        if v[0] < 0.0 {
            return Err(DistError::InvalidParameter(
                "tabulated support must lie in [0, infinity)".into(),
            ));
        }
        if !v.iter().all(|x| x.is_finite()) || !f.iter().all(|x| x.is_finite()) {
            return Err(DistError::InvalidParameter("tabulated entries must be finite".into()));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DistError::InvalidParameter(
                "tabulated valuations must be strictly increasing".into(),
            ));
        }
        if f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DistError::InvalidParameter(
                "tabulated cdf values must be strictly increasing".into(),
            ));
        }
        if f[0].abs() > 1e-12 || (f[f.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(DistError::InvalidParameter(
                "tabulated cdf must run from 0 to 1".into(),
            ));
        }
        let mut f = f;
        let last = f.len() - 1;
        f[0] = 0.0;
        f[last] = 1.0;
        let m = fritsch_carlson_slopes(&v, &f);
        Ok(Self { v, f, m })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.v[0], *self.v.last().unwrap())
    }

    fn segment(&self, x: f64) -> usize {
        // Index i with v[i] <= x < v[i+1].
        match self.v.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.v.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.v.len() - 2),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = self.segment(x);
        let (val, _) = hermite(self.v[i], self.v[i + 1], self.f[i], self.f[i + 1], self.m[i], self.m[i + 1], x);
        val.clamp(0.0, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let x = x.clamp(lo, hi);
        let i = self.segment(x);
        let (_, d) = hermite(self.v[i], self.v[i + 1], self.f[i], self.f[i + 1], self.m[i], self.m[i + 1], x);
        d.max(0.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        // Locate the knot segment by cdf value, then invert the cubic.
        // The inverse must be polished to machine precision: moment
        // quadrature composes it with near-singular integrands, and a
        // coarsely resolved quantile turns into noise the adaptive
        // refinement chases without ever converging.
        let i = match self.f.binary_search_by(|p| p.partial_cmp(&u).unwrap()) {
            Ok(i) => return self.v[i],
            Err(i) => i.saturating_sub(1).min(self.v.len() - 2),
        };
        let seg = |x: f64| {
            hermite(self.v[i], self.v[i + 1], self.f[i], self.f[i + 1], self.m[i], self.m[i + 1], x)
        };
        root::newton_increasing(
            |x| seg(x).0,
            |x| seg(x).1,
            self.v[i],
            self.v[i + 1],
            u,
            super::BISECT_MAX_ITER,
        )
    }
}

/// Monotone cubic Hermite slopes (Fritsch-Carlson with endpoint clamping).
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    // n >= 3 is guaranteed by the constructor.
    m[0] = endpoint_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Cubic Hermite value and derivative on `[x0, x1]`.
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let val = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * m0 + dh11 * m1;
    (val, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform_table(k: usize) -> Vec<(f64, f64)> {
        (0..=k).map(|i| (i as f64 / k as f64, i as f64 / k as f64)).collect()
    }

    #[test]
    fn linear_table_reproduces_uniform() {
        let t = Tabulated::new(&uniform_table(10)).unwrap();
        for &x in &[0.05, 0.37, 0.5, 0.93] {
            assert_relative_eq!(t.cdf(x), x, epsilon = 1e-12);
            assert_relative_eq!(t.pdf(x), 1.0, epsilon = 1e-9);
            assert_relative_eq!(t.quantile(x), x, epsilon = 1e-10);
        }
    }

    #[test]
    fn quantile_is_cdf_inverse() {
        // Table from F(v) = v^2 on [0, 1].
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let v = i as f64 / 20.0;
                (v, v * v)
            })
            .collect();
        let t = Tabulated::new(&pts).unwrap();
        for &u in &[0.01, 0.2, 0.5, 0.7, 0.99] {
            let v = t.quantile(u);
            assert_relative_eq!(t.cdf(v), u, epsilon = 1e-9);
            // Interpolation error versus the true inverse sqrt(u).
            assert!((v - u.sqrt()).abs() < 5e-3);
        }
    }

    #[test]
    fn quantile_inverts_to_machine_precision() {
        // The quantile feeds quadrature integrands; residual inversion
        // error acts there as noise, so it must sit at roundoff even deep
        // into the tails and near the vanishing-density endpoint.
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let v = i as f64 / 20.0;
                (v, v * v)
            })
            .collect();
        let t = Tabulated::new(&pts).unwrap();
        let mut u = 1e-12;
        while u < 1.0 {
            let v = t.quantile(u);
            assert!(
                (t.cdf(v) - u).abs() <= 1e-13 * u.max(1e-3),
                "residual {:.3e} at u = {:.3e}",
                (t.cdf(v) - u).abs(),
                u
            );
            u *= 1.7;
        }
        assert_eq!(t.quantile(0.0), 0.0);
        assert_eq!(t.quantile(1.0), 1.0);
        // Knot hits return the tabulated point exactly.
        assert_eq!(t.quantile(0.25), 0.5);
    }

    #[test]
    fn interpolated_cdf_is_monotone() {
        let pts = [(0.0, 0.0), (0.2, 0.55), (0.4, 0.6), (1.0, 0.62), (1.5, 1.0)];
        let t = Tabulated::new(&pts).unwrap();
        let mut prev = -1.0;
        for k in 0..=300 {
            let x = 1.5 * k as f64 / 300.0;
            let c = t.cdf(x);
            assert!(c >= prev - 1e-12, "cdf dipped at {x}");
            assert!(t.pdf(x) >= 0.0);
            prev = c;
        }
    }

    #[test]
    fn malformed_tables_rejected() {
        assert!(Tabulated::new(&[(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(Tabulated::new(&[(0.0, 0.0), (0.5, 0.4), (0.5, 0.6), (1.0, 1.0)]).is_err());
        assert!(Tabulated::new(&[(0.0, 0.1), (0.5, 0.5), (1.0, 1.0)]).is_err());
        assert!(Tabulated::new(&[(0.0, 0.0), (0.5, 0.6), (1.0, 0.9)]).is_err());
        assert!(Tabulated::new(&[(-0.5, 0.0), (0.5, 0.5), (1.0, 1.0)]).is_err());
    }
}
