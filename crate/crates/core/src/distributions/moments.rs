//! Moment bundles: the averaged distribution/transform moments that feed
//! every closed-form bound.

use super::{quantile_integral, DistError, Transform, ValuationDistribution, QUAD_TOL};
use crate::numeric::quad;
use std::sync::Arc;

/// Relative determinant floor below which the (psi, h) pair is treated as
/// perfectly correlated and the bivariate factor is undefined.
const DEGENERACY_TOL: f64 = 1e-6;

/// Averaged moments for a profile of agents.
///
/// `sigma2_psi` and `rho_psi` are raw second/third absolute moments of the
/// virtual valuation (which is mean zero); the `h` moments are central.
#[derive(Debug, Clone)]
pub struct MomentBundle {
    pub n: usize,
    pub mu_bar: f64,
    pub sigma2_psi: f64,
    pub rho_psi: f64,
    pub mu_h_bar: f64,
    pub sigma2_h: f64,
    pub rho_h: f64,
    pub sigma_psih: f64,
    /// Average support cap, when every agent has one.
    pub b_bar: Option<f64>,
    /// Average transformed cap `h_i(b_i)`, when every agent has one.
    pub b_h_bar: Option<f64>,
    eta_bar: Option<f64>,
}

impl MomentBundle {
    /// Builds a bundle from externally supplied averaged moments.
    ///
    /// Useful for hand-constructed examples and for re-sizing a bundle to a
    /// different agent count. Caps are optional; pass `None` for unbounded
    /// supports. The bivariate factor is derived from the covariance matrix,
    /// so degeneracy is detected exactly as in [`compute_moments`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        mu_bar: f64,
        sigma2_psi: f64,
        rho_psi: f64,
        mu_h_bar: f64,
        sigma2_h: f64,
        rho_h: f64,
        sigma_psih: f64,
        b_bar: Option<f64>,
        b_h_bar: Option<f64>,
    ) -> Result<Self, DistError> {
        if n == 0 {
            return Err(DistError::InvalidParameter("need at least one agent".into()));
        }
        for (name, x) in [
            ("mu_bar", mu_bar),
            ("sigma2_psi", sigma2_psi),
            ("rho_psi", rho_psi),
            ("mu_h_bar", mu_h_bar),
            ("sigma2_h", sigma2_h),
            ("rho_h", rho_h),
            ("sigma_psih", sigma_psih),
        ] {
            if !x.is_finite() {
                return Err(DistError::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if sigma2_psi <= 0.0 || sigma2_h <= 0.0 || rho_psi <= 0.0 || rho_h <= 0.0 {
            return Err(DistError::InvalidParameter(
                "second and third moments must be strictly positive".into(),
            ));
        }
        let eta_bar = eta_from(sigma2_psi, sigma2_h, sigma_psih);
        Ok(MomentBundle {
            n,
            mu_bar,
            sigma2_psi,
            rho_psi,
            mu_h_bar,
            sigma2_h,
            rho_h,
            sigma_psih,
            b_bar,
            b_h_bar,
            eta_bar,
        })
    }

    /// Copy of the bundle with the agent count replaced; per-agent averages
    /// are unchanged.
    pub fn with_n(&self, n: usize) -> Result<Self, DistError> {
        if n == 0 {
            return Err(DistError::InvalidParameter("need at least one agent".into()));
        }
        let mut out = self.clone();
        out.n = n;
        Ok(out)
    }

    /// Bivariate Berry-Esseen factor
    /// `((sigma2_psi + sigma2_h) / (sigma2_psi sigma2_h - sigma_psih^2))^{3/2}`.
    ///
    /// Errors when the pair is perfectly correlated (for example the
    /// identity transform on a uniform or exponential law, where psi is an
    /// affine function of v, or `h = psi` itself).
    pub fn eta(&self) -> Result<f64, DistError> {
        self.eta_bar.ok_or(DistError::DegenerateCorrelation)
    }

    pub fn is_degenerate(&self) -> bool {
        self.eta_bar.is_none()
    }

    /// Correlation between the virtual and transformed valuations.
    pub fn correlation(&self) -> f64 {
        self.sigma_psih / (self.sigma2_psi * self.sigma2_h).sqrt()
    }
}

/// Mean of the transformed valuation, `E[h(V)]`.
pub fn transform_mean(dist: &ValuationDistribution, h: &Transform) -> Result<f64, DistError> {
    checked_quantile_integral(dist, |v| h.eval(v).unwrap_or(f64::NAN), "E[h(V)]")
}

/// The covariance-type moment `sigma_{psi h} = E[int_0^V v dh(v)]`,
/// computed by parts as `E[V h(V)] - E[int_0^V h(v) dv]` with the second
/// term reduced to a survival-weighted integral.
///
/// For increasing continuous `h` this equals `E[psi(V) h(V)]` and is
/// strictly positive; tests cross-check that identity by simulation.
pub fn cov_psi_h(dist: &ValuationDistribution, h: &Transform) -> Result<f64, DistError> {
    let term1 = checked_quantile_integral(dist, |v| v * h.eval(v).unwrap_or(f64::NAN), "E[V h(V)]")?;
    let (lo, hi) = dist.support();
    let h_at = |v: f64| h.eval(v).unwrap_or(f64::NAN);
    let mut term2 = 0.0;
    if lo > 0.0 {
        // P(V > v) = 1 below the support.
        let r = quad::integrate(h_at, 0.0, lo, QUAD_TOL);
        term2 += check_quad(r, "int_0^lo h")?;
    }
    let tail = if hi.is_finite() {
        quad::integrate(|v| h_at(v) * dist.survival(v), lo, hi, QUAD_TOL)
    } else {
        quad::integrate_semi_infinite(|v| h_at(v) * dist.survival(v), lo, QUAD_TOL)
    };
    term2 += check_quad(tail, "int h (1-F)")?;
    Ok(term1 - term2)
}

/// Per-agent moments averaged over the profile, with the per-agent Lyapunov
/// inequality `rho >= sigma^3` verified before averaging.
pub fn compute_moments(
    dists: &[Arc<ValuationDistribution>],
    hs: &[Transform],
) -> Result<MomentBundle, DistError> {
    if dists.is_empty() || dists.len() != hs.len() {
        return Err(DistError::InvalidParameter(
            "moment computation needs matching, nonempty distribution and transform lists".into(),
        ));
    }
    let n = dists.len();
    let mut acc = AgentMoments::default();
    let mut caps_ok = true;
    let mut b_sum = 0.0;
    let mut b_h_sum = 0.0;
    for (dist, h) in dists.iter().zip(hs) {
        let a = agent_moments(dist, h)?;
        lyapunov_check(a.sigma2_psi, a.rho_psi)?;
        lyapunov_check(a.sigma2_h, a.rho_h)?;
        acc.add(&a);
        match dist.cap() {
            Some(b) if caps_ok => {
                b_sum += b;
                b_h_sum += h.eval(b)?;
            }
            _ => caps_ok = false,
        }
    }
    let inv = 1.0 / n as f64;
    let sigma2_psi = acc.sigma2_psi * inv;
    let sigma2_h = acc.sigma2_h * inv;
    let sigma_psih = acc.sigma_psih * inv;
    let eta_bar = eta_from(sigma2_psi, sigma2_h, sigma_psih);
    Ok(MomentBundle {
        n,
        mu_bar: acc.mu * inv,
        sigma2_psi,
        rho_psi: acc.rho_psi * inv,
        mu_h_bar: acc.mu_h * inv,
        sigma2_h,
        rho_h: acc.rho_h * inv,
        sigma_psih,
        b_bar: caps_ok.then(|| b_sum * inv),
        b_h_bar: caps_ok.then(|| b_h_sum * inv),
        eta_bar,
    })
}

/// Moment bundle for `n` agents drawing i.i.d. from one distribution.
pub fn compute_moments_iid(
    dist: &ValuationDistribution,
    h: &Transform,
    n: usize,
) -> Result<MomentBundle, DistError> {
    if n == 0 {
        return Err(DistError::InvalidParameter("need at least one agent".into()));
    }
    let shared = Arc::new(dist.clone());
    let mut bundle = compute_moments(&[shared], &[h.clone()])?;
    bundle.n = n;
    Ok(bundle)
}

/// `None` when the 2x2 covariance matrix of `(psi, h)` is numerically
/// singular, i.e. the pair is perfectly correlated.
fn eta_from(sigma2_psi: f64, sigma2_h: f64, sigma_psih: f64) -> Option<f64> {
    let prod = sigma2_psi * sigma2_h;
    let det = prod - sigma_psih * sigma_psih;
    (det > DEGENERACY_TOL * prod).then(|| ((sigma2_psi + sigma2_h) / det).powf(1.5))
}

#[derive(Default)]
struct AgentMoments {
    mu: f64,
    sigma2_psi: f64,
    rho_psi: f64,
    mu_h: f64,
    sigma2_h: f64,
    rho_h: f64,
    sigma_psih: f64,
}

impl AgentMoments {
    fn add(&mut self, other: &AgentMoments) {
        self.mu += other.mu;
        self.sigma2_psi += other.sigma2_psi;
        self.rho_psi += other.rho_psi;
        self.mu_h += other.mu_h;
        self.sigma2_h += other.sigma2_h;
        self.rho_h += other.rho_h;
        self.sigma_psih += other.sigma_psih;
    }
}

fn agent_moments(dist: &ValuationDistribution, h: &Transform) -> Result<AgentMoments, DistError> {
    let mu = dist.mean()?;
    let psi = |v: f64| dist.virtual_valuation(v).unwrap_or(f64::NAN);
    let mean_psi = checked_quantile_integral(dist, psi, "E[psi]")?;
    if mean_psi.abs() > 1e-6 * mu.abs().max(1.0) {
        return Err(DistError::DivergentMoment(format!(
            "virtual valuation mean {mean_psi:.3e} is not numerically zero"
        )));
    }
    let sigma2_psi = checked_quantile_integral(dist, |v| psi(v).powi(2), "E[psi^2]")?;
    let rho_psi = checked_quantile_integral(dist, |v| psi(v).abs().powi(3), "E[|psi|^3]")?;
    let mu_h = transform_mean(dist, h)?;
    let h_c = |v: f64| h.eval(v).unwrap_or(f64::NAN) - mu_h;
    let sigma2_h = checked_quantile_integral(dist, |v| h_c(v).powi(2), "E[(h - mu_h)^2]")?;
    let rho_h = checked_quantile_integral(dist, |v| h_c(v).abs().powi(3), "E[|h - mu_h|^3]")?;
    let sigma_psih = cov_psi_h(dist, h)?;
    Ok(AgentMoments { mu, sigma2_psi, rho_psi, mu_h, sigma2_h, rho_h, sigma_psih })
}

fn lyapunov_check(sigma2: f64, rho: f64) -> Result<(), DistError> {
    let sigma3 = sigma2.powf(1.5);
    if rho < sigma3 * (1.0 - 1e-9) {
        return Err(DistError::DivergentMoment(format!(
            "third moment {rho:.6e} fell below sigma^3 = {sigma3:.6e}; quadrature is inconsistent"
        )));
    }
    Ok(())
}

fn checked_quantile_integral(
    dist: &ValuationDistribution,
    g: impl Fn(f64) -> f64,
    what: &str,
) -> Result<f64, DistError> {
    quantile_integral(dist, g, what)
}

fn check_quad(r: quad::QuadResult, what: &str) -> Result<f64, DistError> {
    if !r.value.is_finite() || (!r.converged && r.error > 1e-6 * r.value.abs().max(1.0)) {
        return Err(DistError::DivergentMoment(what.to_string()));
    }
    Ok(r.value)
}
