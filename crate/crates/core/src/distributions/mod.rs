//! Valuation distributions on [0, infinity), their virtual valuations, and
//! the moment bundles consumed by the bound calculators.
//!
//! Every family exposes cdf/pdf/survival/quantile evaluators. Moments are
//! integrated on the quantile scale, `E[g(V)] = \int_0^1 g(Q(u)) du`, which
//! keeps unbounded supports and heavy tails on a finite interval.

mod moments;
mod tabulated;
mod transform;

pub use moments::{compute_moments, compute_moments_iid, cov_psi_h, transform_mean, MomentBundle};
pub use tabulated::Tabulated;
pub use transform::Transform;

use crate::numeric::{quad, root};
use std::fmt;
use std::sync::Arc;

/// Densities below this are treated as singular when dividing by `f`.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Default number of interior quantile points for shape diagnostics.
pub const DEFAULT_GRID: usize = 10_001;

/// Absolute tolerance for moment quadrature.
pub(crate) const QUAD_TOL: f64 = 1e-8;

/// Relative bisection tolerance for quantile and transform inversion.
pub(crate) const BISECT_TOL: f64 = 1e-12;
pub(crate) const BISECT_MAX_ITER: u32 = 200;

#[derive(Debug, thiserror::Error)]
pub enum DistError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("density {density:.3e} is below the {floor:.0e} floor at v = {v}")]
    SingularDensity { v: f64, density: f64, floor: f64 },
    #[error("moment integral did not converge: {0}")]
    DivergentMoment(String),
    #[error("virtual and transformed valuations are perfectly correlated; the bivariate factor is undefined")]
    DegenerateCorrelation,
    #[error("map is not strictly increasing near v = {v}")]
    NonMonotoneMap { v: f64 },
}

/// Strictly increasing map used by the pushforward family.
#[derive(Clone)]
pub struct MonotoneMap(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl MonotoneMap {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MonotoneMap(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        (self.0)(v)
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MonotoneMap")
    }
}

#[derive(Debug, Clone)]
enum Family {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Two-point mixture of exponentials: weight on rate1, rest on rate2.
    ExpMixture { weight: f64, rate1: f64, rate2: f64 },
    Tabulated(Tabulated),
    Pushforward { base: Arc<ValuationDistribution>, map: MonotoneMap },
}

/// A valuation distribution with optional hard cap for bounded-support
/// analyses. The cap defaults to the upper support endpoint when finite.
#[derive(Debug, Clone)]
pub struct ValuationDistribution {
    family: Family,
    cap: Option<f64>,
}

fn require(cond: bool, msg: &str) -> Result<(), DistError> {
    if cond {
        Ok(())
    } else {
        Err(DistError::InvalidParameter(msg.to_string()))
    }
}

impl ValuationDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistError> {
        require(lo.is_finite() && hi.is_finite(), "uniform endpoints must be finite")?;
        require(lo >= 0.0, "uniform support must lie in [0, infinity)")?;
        require(hi > lo, "uniform needs hi > lo")?;
        Ok(Self { family: Family::Uniform { lo, hi }, cap: Some(hi) })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        require(rate.is_finite() && rate > 0.0, "exponential rate must be positive")?;
        Ok(Self { family: Family::Exponential { rate }, cap: None })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self, DistError> {
        require(shape.is_finite() && shape > 0.0, "weibull shape must be positive")?;
        require(scale.is_finite() && scale > 0.0, "weibull scale must be positive")?;
        Ok(Self { family: Family::Weibull { shape, scale }, cap: None })
    }

    pub fn exp_mixture(weight: f64, rate1: f64, rate2: f64) -> Result<Self, DistError> {
        require((0.0..=1.0).contains(&weight), "mixture weight must lie in [0, 1]")?;
        require(rate1.is_finite() && rate1 > 0.0, "mixture rate1 must be positive")?;
        require(rate2.is_finite() && rate2 > 0.0, "mixture rate2 must be positive")?;
        Ok(Self { family: Family::ExpMixture { weight, rate1, rate2 }, cap: None })
    }

    /// Tabulated cdf given as `(v, F(v))` pairs; see [`Tabulated`] for the
    /// shape requirements.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self, DistError> {
        let tab = Tabulated::new(points)?;
        let hi = tab.support().1;
        Ok(Self { family: Family::Tabulated(tab), cap: Some(hi) })
    }

    /// Pushforward of `base` under a strictly increasing map, checked on a
    /// quantile grid. Used to reduce non-binary allocation problems to the
    /// binary mechanism.
    pub fn monotone_pushforward(
        base: Arc<ValuationDistribution>,
        map: MonotoneMap,
    ) -> Result<Self, DistError> {
        let grid = 1001;
        let mut prev_v = f64::NAN;
        let mut prev_g = f64::NAN;
        for k in 1..=grid {
            let u = k as f64 / (grid + 1) as f64;
            let v = base.quantile(u);
            let g = map.eval(v);
            if !g.is_finite() {
                return Err(DistError::NonMonotoneMap { v });
            }
            if k > 1 && g <= prev_g {
                return Err(DistError::NonMonotoneMap { v: prev_v });
            }
            prev_v = v;
            prev_g = g;
        }
        let cap = match base.support().1 {
            hi if hi.is_finite() => Some(map.eval(hi)),
            _ => None,
        };
        Ok(Self { family: Family::Pushforward { base, map }, cap })
    }

    /// Override the hard cap used by bounded-support analyses.
    pub fn with_cap(mut self, b: f64) -> Result<Self, DistError> {
        let (lo, hi) = self.support();
        require(b.is_finite() && b > lo, "cap must be finite and above the lower endpoint")?;
        require(b <= hi, "cap cannot exceed the upper support endpoint")?;
        self.cap = Some(b);
        Ok(self)
    }

    /// Support endpoints `(lo, hi)`; `hi` may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match &self.family {
            Family::Uniform { lo, hi } => (*lo, *hi),
            Family::Exponential { .. } | Family::Weibull { .. } | Family::ExpMixture { .. } => {
                (0.0, f64::INFINITY)
            }
            Family::Tabulated(t) => t.support(),
            Family::Pushforward { base, map } => {
                let (lo, hi) = base.support();
                let top = if hi.is_finite() { map.eval(hi) } else { f64::INFINITY };
                (map.eval(lo), top)
            }
        }
    }

    /// Hard cap for bounded-support variants, when one exists.
    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    pub fn cdf(&self, v: f64) -> f64 {
        let (lo, hi) = self.support();
        if v <= lo {
            return 0.0;
        }
        if v >= hi {
            return 1.0;
        }
        match &self.family {
            Family::Uniform { lo, hi } => (v - lo) / (hi - lo),
            Family::Exponential { rate } => -(-rate * v).exp_m1(),
            Family::Weibull { shape, scale } => -(-(v / scale).powf(*shape)).exp_m1(),
            Family::ExpMixture { .. } => 1.0 - self.survival(v),
            Family::Tabulated(t) => t.cdf(v),
            Family::Pushforward { base, map } => base.cdf(invert_map(base, map, v)),
        }
    }

    /// Survival `1 - F(v)` evaluated without cancellation in the far tail.
    pub fn survival(&self, v: f64) -> f64 {
        let (lo, hi) = self.support();
        if v <= lo {
            return 1.0;
        }
        if v >= hi {
            return 0.0;
        }
        match &self.family {
            Family::Uniform { lo, hi } => (hi - v) / (hi - lo),
            Family::Exponential { rate } => (-rate * v).exp(),
            Family::Weibull { shape, scale } => (-(v / scale).powf(*shape)).exp(),
            Family::ExpMixture { weight, rate1, rate2 } => {
                weight * (-rate1 * v).exp() + (1.0 - weight) * (-rate2 * v).exp()
            }
            Family::Tabulated(t) => 1.0 - t.cdf(v),
            Family::Pushforward { base, map } => base.survival(invert_map(base, map, v)),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        let (lo, hi) = self.support();
        if v < lo || v > hi {
            return 0.0;
        }
        match &self.family {
            Family::Uniform { lo, hi } => 1.0 / (hi - lo),
            Family::Exponential { rate } => rate * (-rate * v).exp(),
            Family::Weibull { shape, scale } => {
                if v <= 0.0 {
                    // k < 1 diverges at the origin, k > 1 vanishes there.
                    return if *shape < 1.0 { f64::INFINITY } else if *shape > 1.0 { 0.0 } else { 1.0 / scale };
                }
                (shape / scale) * (v / scale).powf(shape - 1.0) * (-(v / scale).powf(*shape)).exp()
            }
            Family::ExpMixture { weight, rate1, rate2 } => {
                weight * rate1 * (-rate1 * v).exp() + (1.0 - weight) * rate2 * (-rate2 * v).exp()
            }
            Family::Tabulated(t) => t.pdf(v),
            Family::Pushforward { base, map } => {
                let x = invert_map(base, map, v);
                let slope = map_derivative(map, x);
                if slope <= 0.0 {
                    return 0.0;
                }
                base.pdf(x) / slope
            }
        }
    }

    /// Quantile function; `u` is clamped to [0, 1]. For unbounded supports
    /// `quantile(1)` is infinite.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        match &self.family {
            Family::Uniform { lo, hi } => lo + u * (hi - lo),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::ExpMixture { rate1, rate2, .. } => {
                let rmin = rate1.min(*rate2);
                let hi_bracket = -(-u).ln_1p() / rmin + 1e-12;
                let tol = BISECT_TOL * hi_bracket.max(1.0);
                root::bisect_increasing(|v| self.cdf(v), 0.0, hi_bracket, u, tol, BISECT_MAX_ITER)
            }
            Family::Tabulated(t) => t.quantile(u),
            Family::Pushforward { base, map } => map.eval(base.quantile(u)),
        }
    }

    /// Draw by inversion: `sample(u) = quantile(u)` for `u ~ U[0,1)`.
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        self.quantile(u)
    }

    pub fn mean(&self) -> Result<f64, DistError> {
        match &self.family {
            Family::Uniform { lo, hi } => Ok(0.5 * (lo + hi)),
            Family::Exponential { rate } => Ok(1.0 / rate),
            Family::Weibull { shape, scale } => {
                Ok(scale * statrs::function::gamma::gamma(1.0 + 1.0 / shape))
            }
            Family::ExpMixture { weight, rate1, rate2 } => {
                Ok(weight / rate1 + (1.0 - weight) / rate2)
            }
            _ => quantile_integral(self, |v| v, "mean"),
        }
    }

    /// The ratio `(1 - F(v)) / f(v)` in closed form, where the family has
    /// one. Both survival and density underflow deep in the tail; their
    /// ratio does not, and evaluating it directly keeps hazard and virtual
    /// valuations exact out to arbitrary quantiles.
    fn inverse_hazard_closed(&self, v: f64) -> Option<f64> {
        match &self.family {
            Family::Uniform { hi, .. } => Some(hi - v),
            Family::Exponential { rate } => Some(1.0 / rate),
            Family::Weibull { shape, scale } => {
                Some((scale / shape) * (v / scale).powf(1.0 - shape))
            }
            Family::ExpMixture { weight, rate1, rate2 } => {
                // Factor out exp(-rmin v) so both sums stay on scale.
                let rmin = rate1.min(*rate2);
                let e1 = (-(rate1 - rmin) * v).exp();
                let e2 = (-(rate2 - rmin) * v).exp();
                let num = weight * e1 + (1.0 - weight) * e2;
                let den = weight * rate1 * e1 + (1.0 - weight) * rate2 * e2;
                Some(num / den)
            }
            Family::Tabulated(_) | Family::Pushforward { .. } => None,
        }
    }

    /// Hazard rate `f / (1 - F)`.
    pub fn hazard(&self, v: f64) -> Result<f64, DistError> {
        let (lo, hi) = self.support();
        if v >= lo && v < hi {
            if let Some(ih) = self.inverse_hazard_closed(v) {
                if ih.is_finite() && ih > 0.0 {
                    return Ok(1.0 / ih);
                }
            }
        }
        let s = self.survival(v);
        if s <= 0.0 {
            return Err(DistError::SingularDensity { v, density: 0.0, floor: DENSITY_FLOOR });
        }
        Ok(self.pdf(v) / s)
    }

    /// Virtual valuation `psi(v) = v - (1 - F(v)) / f(v)`.
    ///
    /// Analytic families use the closed-form survival/density ratio and so
    /// stay finite over the whole interior of the support. Otherwise errors
    /// when the density sits below [`DENSITY_FLOOR`], except at a finite
    /// upper endpoint where the one-sided limit `psi(hi) = hi` is used (the
    /// survival vanishes at least as fast as the density there).
    pub fn virtual_valuation(&self, v: f64) -> Result<f64, DistError> {
        let (lo, hi) = self.support();
        if hi.is_finite() && v >= hi {
            return Ok(v);
        }
        if v >= lo {
            if let Some(ih) = self.inverse_hazard_closed(v) {
                let psi = v - ih;
                if psi.is_finite() {
                    return Ok(psi);
                }
                return Err(DistError::SingularDensity {
                    v,
                    density: self.pdf(v),
                    floor: DENSITY_FLOOR,
                });
            }
        }
        let f = self.pdf(v);
        if !(f >= DENSITY_FLOOR) {
            return Err(DistError::SingularDensity { v, density: f, floor: DENSITY_FLOOR });
        }
        Ok(v - self.survival(v) / f)
    }

    /// Myerson regularity: the virtual valuation is nondecreasing across an
    /// interior quantile grid (up to a 1e-9 scale tolerance).
    pub fn is_myerson_regular(&self, grid: usize) -> Result<bool, DistError> {
        let psis = self.grid_values(grid, |d, v| d.virtual_valuation(v))?;
        Ok(is_monotone(&psis, true))
    }

    /// Decreasing hazard rate across an interior quantile grid.
    pub fn has_dhr(&self, grid: usize) -> Result<bool, DistError> {
        let hs = self.grid_values(grid, |d, v| d.hazard(v))?;
        Ok(is_monotone(&hs, false))
    }

    fn grid_values(
        &self,
        grid: usize,
        eval: impl Fn(&Self, f64) -> Result<f64, DistError>,
    ) -> Result<Vec<f64>, DistError> {
        let g = grid.max(3);
        let mut out = Vec::with_capacity(g);
        for k in 1..=g {
            let u = k as f64 / (g + 1) as f64;
            out.push(eval(self, self.quantile(u))?);
        }
        Ok(out)
    }
}

/// Monotonicity on a grid with tolerance 1e-9 relative to the value scale.
fn is_monotone(xs: &[f64], increasing: bool) -> bool {
    let scale = xs.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    xs.windows(2).all(|w| if increasing { w[1] >= w[0] - tol } else { w[1] <= w[0] + tol })
}

/// Quantile-scale expectation `E[g(V)]` at the module tolerance.
pub(crate) fn quantile_integral(
    dist: &ValuationDistribution,
    g: impl Fn(f64) -> f64,
    what: &str,
) -> Result<f64, DistError> {
    // Quadrature nodes stay interior, but guard the endpoint anyway: for
    // unbounded supports quantile(1) is infinite.
    let r = quad::integrate(|u| if u >= 1.0 { 0.0 } else { g(dist.quantile(u)) }, 0.0, 1.0, QUAD_TOL);
    if !r.value.is_finite() || !r.converged && r.error > 1e-6 * r.value.abs().max(1.0) {
        return Err(DistError::DivergentMoment(what.to_string()));
    }
    Ok(r.value)
}

/// Invert the pushforward map at `x` by bisection over the base support.
fn invert_map(base: &ValuationDistribution, map: &MonotoneMap, x: f64) -> f64 {
    let (lo, hi) = base.support();
    let upper = if hi.is_finite() {
        hi
    } else {
        let mut b = base.quantile(0.99).max(lo + 1.0);
        while map.eval(b) < x && b < 1e18 {
            b *= 2.0;
        }
        b
    };
    if map.eval(upper) < x {
        return upper;
    }
    if map.eval(lo) >= x {
        return lo;
    }
    let tol = BISECT_TOL * upper.abs().max(1.0);
    root::bisect_increasing(|v| map.eval(v), lo, upper, x, tol, BISECT_MAX_ITER)
}

/// Central-difference derivative of the pushforward map.
fn map_derivative(map: &MonotoneMap, v: f64) -> f64 {
    let eps = 1e-6 * v.abs().max(1.0);
    let lo = (v - eps).max(0.0);
    let width = v + eps - lo;
    if width <= 0.0 {
        return 0.0;
    }
    (map.eval(v + eps) - map.eval(lo)) / width
}
