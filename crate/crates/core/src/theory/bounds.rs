//! Truncated-mean central terms, normal-approximation error bands, and the
//! budget, regret, tail, incentive, and profit bound expressions built from
//! them.

use super::{Constants, TheoryError};
use crate::distributions::MomentBundle;
use crate::numeric::normal::{norm_cdf, phi};
use std::f64::consts::PI;

/// `E[S_X 1{S_Y >= alpha}]` for a centered joint-normal pair of sums of `n`
/// i.i.d. terms with cross-covariance `sigma_xy` and conditioning standard
/// deviation `sigma_y` per term: `sqrt(n) (sigma_xy / sigma_y) phi(alpha /
/// (sqrt(n) sigma_y))`.
///
/// With `X = Y` (`sigma_xy = sigma_y^2`) this reduces to
/// `sqrt(n) sigma_x phi(alpha / (sqrt(n) sigma_x))`. Infinite `alpha` is
/// accepted and yields 0.
pub fn normal_truncated_mean(
    sigma_xy: f64,
    sigma_y: f64,
    n: usize,
    alpha: f64,
) -> Result<f64, TheoryError> {
    if n == 0 {
        return Err(TheoryError::Domain("need at least one summand".into()));
    }
    if !(sigma_y.is_finite() && sigma_y > 0.0) {
        return Err(TheoryError::Domain(format!(
            "conditioning standard deviation must be positive, got {sigma_y}"
        )));
    }
    if !sigma_xy.is_finite() {
        return Err(TheoryError::Domain("cross-covariance must be finite".into()));
    }
    if alpha.is_nan() {
        return Err(TheoryError::Domain("threshold must not be NaN".into()));
    }
    let root_n = (n as f64).sqrt();
    Ok(root_n * (sigma_xy / sigma_y) * phi(alpha / (root_n * sigma_y)))
}

/// Kolmogorov-distance bound for the normalized sum of `n` independent terms
/// with averaged variance `sigma2` and averaged third absolute moment `rho`:
/// `(c1 / sqrt(n)) rho / sigma^3`.
pub fn be_bound_uni(n: usize, sigma2: f64, rho: f64, c1: f64) -> Result<f64, TheoryError> {
    if n == 0 {
        return Err(TheoryError::Domain("need at least one summand".into()));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(TheoryError::Domain(format!("variance must be positive, got {sigma2}")));
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(TheoryError::Domain("third absolute moment must be nonnegative".into()));
    }
    if !(c1.is_finite() && c1 > 0.0) {
        return Err(TheoryError::Domain("approximation constant must be positive".into()));
    }
    Ok(c1 / (n as f64).sqrt() * rho / sigma2.powf(1.5))
}

/// Convex-set distance bound for the normalized bivariate sum of the
/// (virtual, transformed) pair: `(c2 / sqrt(n)) eta (rho_psi + rho_h)`, with
/// `eta` the inverse-smallest-eigenvalue factor of the pair's covariance.
///
/// Errors when the pair is perfectly correlated; use the univariate bound
/// (or [`BandKind::Bivariate`]'s automatic fallback) in that case.
pub fn be_bound_multi(bundle: &MomentBundle, c2: f64) -> Result<f64, TheoryError> {
    if !(c2.is_finite() && c2 > 0.0) {
        return Err(TheoryError::Domain("approximation constant must be positive".into()));
    }
    let eta = bundle.eta()?;
    Ok(c2 / (bundle.n as f64).sqrt() * eta * (bundle.rho_psi + bundle.rho_h))
}

/// Which normal-approximation error band to attach to a truncated-mean
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    /// Band from the univariate approximation of the summed virtual
    /// valuation; exact choice when the conditioning statistic is the same
    /// sum (or an affine image of it).
    Univariate,
    /// Band from the bivariate convex-set approximation of the
    /// (virtual, transformed) pair. When the pair is perfectly correlated
    /// the bivariate factor is undefined and this falls back to the
    /// univariate band, which is then the exact description of the pair.
    Bivariate,
}

/// A central estimate with a symmetric (or cost-shifted) error band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Leading joint-normal term.
    pub central: f64,
    /// Total width added on each side by the approximation error.
    pub band: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The n-free factor of the truncation error band:
/// `2 c1 rho_psi / sigma_psi^3 + 2 sigma2_psi` (univariate) or
/// `2 c2 eta (rho_psi + rho_h) + 2 sigma2_psi` (bivariate, falling back to
/// univariate on perfect correlation).
fn band_factor(
    bundle: &MomentBundle,
    kind: BandKind,
    constants: &Constants,
) -> Result<f64, TheoryError> {
    let uni =
        2.0 * constants.c1 * bundle.rho_psi / bundle.sigma2_psi.powf(1.5) + 2.0 * bundle.sigma2_psi;
    match kind {
        BandKind::Univariate => Ok(uni),
        BandKind::Bivariate if bundle.is_degenerate() => Ok(uni),
        BandKind::Bivariate => {
            let eta = bundle.eta()?;
            Ok(2.0 * constants.c2 * eta * (bundle.rho_psi + bundle.rho_h)
                + 2.0 * bundle.sigma2_psi)
        }
    }
}

/// Brackets `E[S_psi 1{S_h - n mu_h >= alpha}]`: the joint-normal central
/// term plus/minus `n^{1/4}` times the band factor for `kind`.
pub fn truncated_mean_bounds(
    bundle: &MomentBundle,
    alpha: f64,
    kind: BandKind,
    constants: &Constants,
) -> Result<BoundReport, TheoryError> {
    let central =
        normal_truncated_mean(bundle.sigma_psih, bundle.sigma2_h.sqrt(), bundle.n, alpha)?;
    let band = (bundle.n as f64).powf(0.25) * band_factor(bundle, kind, constants)?;
    Ok(BoundReport { central, band, lower: central - band, upper: central + band })
}

/// Brackets the expected net budget of a mean-adjusted rule with pivotal
/// transfers: expected revenue is the truncated mean of the virtual sum, and
/// the provision cost can only lower it, so
/// `lower = central - band - cost` and `upper = central + band`.
pub fn budget_bounds(
    bundle: &MomentBundle,
    alpha: f64,
    cost: f64,
    kind: BandKind,
    constants: &Constants,
) -> Result<BoundReport, TheoryError> {
    if !(cost.is_finite() && cost >= 0.0) {
        return Err(TheoryError::Domain(format!("cost must be finite and >= 0, got {cost}")));
    }
    let r = truncated_mean_bounds(bundle, alpha, kind, constants)?;
    Ok(BoundReport {
        central: r.central,
        band: r.band,
        lower: r.central - r.band - cost,
        upper: r.central + r.band,
    })
}

/// Upper bound on the expected-welfare regret ratio
/// `(E[W*] - E[W]) / E[W*]` of the mean-adjusted rule at threshold `alpha`
/// and provision cost `cost`, as the sum of five terms: the cost share, the
/// no-provision probability, the univariate approximation error of the
/// decision statistic, the truncation loss of the virtual sum, and the
/// truncated-mean band scaled by `n^{3/4} mu_bar`.
///
/// Uses the bivariate band factor, falling back to the univariate one when
/// the (virtual, transformed) pair is perfectly correlated.
pub fn regret_upper_bound(
    bundle: &MomentBundle,
    alpha: f64,
    cost: f64,
    constants: &Constants,
) -> Result<f64, TheoryError> {
    if !(cost.is_finite() && cost >= 0.0) {
        return Err(TheoryError::Domain(format!("cost must be finite and >= 0, got {cost}")));
    }
    if alpha.is_nan() {
        return Err(TheoryError::Domain("threshold must not be NaN".into()));
    }
    if bundle.mu_bar <= 0.0 {
        return Err(TheoryError::Domain(
            "regret ratio needs a strictly positive mean valuation".into(),
        ));
    }
    let n = bundle.n as f64;
    let mu = bundle.mu_bar;
    let sigma_h = bundle.sigma2_h.sqrt();
    let cost_share = cost / (n * mu);
    let miss_prob = norm_cdf(alpha / (n.sqrt() * sigma_h));
    let decision_err = be_bound_uni(bundle.n, bundle.sigma2_h, bundle.rho_h, constants.c1)?;
    let truncation = bundle.sigma2_psi.sqrt() / (2.0 * PI).sqrt() / (n.sqrt() * mu);
    let band = band_factor(bundle, BandKind::Bivariate, constants)? / (n.powf(0.75) * mu);
    Ok(cost_share + miss_prob + decision_err + truncation + band)
}

/// Exponential tail bounds for ex post events under bounded supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingBounds {
    /// Bound on `P(W <= delta W*)`: realized welfare falls below a fraction
    /// `delta` of the efficient welfare.
    pub low_welfare: f64,
    /// Bound on the probability that the realized budget fails to cover the
    /// accounting slack, as the sum of a no-provision term in the decision
    /// statistic and a low-value-sum term.
    pub identity_mismatch: f64,
}

/// Tail bounds for a profile of `n` agents with mean valuation `mu_bar`,
/// support caps averaging `b_bar`, and transformed caps averaging `b_h_bar`:
/// `low_welfare = exp(-2 (1-delta)^2 mu_bar^2 / b_bar^2)` and
/// `identity_mismatch = exp(-2 alpha^2 / (n b_h_bar^2)) +
/// exp(-2 (cost - n mu_bar)^2 / (n b_bar^2))`.
pub fn hoeffding_ex_post(
    n: usize,
    alpha: f64,
    cost: f64,
    mu_bar: f64,
    b_bar: f64,
    b_h_bar: f64,
    delta: f64,
) -> Result<HoeffdingBounds, TheoryError> {
    if n == 0 {
        return Err(TheoryError::Domain("need at least one agent".into()));
    }
    if !(alpha.is_finite() && cost.is_finite() && cost >= 0.0) {
        return Err(TheoryError::Domain("threshold and cost must be finite, cost >= 0".into()));
    }
    if !(mu_bar.is_finite() && mu_bar > 0.0) {
        return Err(TheoryError::Domain("mean valuation must be positive".into()));
    }
    if !(b_bar.is_finite() && b_bar > 0.0 && b_h_bar.is_finite() && b_h_bar > 0.0) {
        return Err(TheoryError::Domain(
            "tail bounds need finite positive support caps".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TheoryError::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let nf = n as f64;
    let low_welfare = (-2.0 * (1.0 - delta).powi(2) * mu_bar * mu_bar / (b_bar * b_bar)).exp();
    let identity_mismatch = (-2.0 * alpha * alpha / (nf * b_h_bar * b_h_bar)).exp()
        + (-2.0 * (cost - nf * mu_bar).powi(2) / (nf * b_bar * b_bar)).exp();
    Ok(HoeffdingBounds { low_welfare, identity_mismatch })
}

/// Approximate-incentive slack of the paired-rebate scheme for a profile of
/// `bundle.n + 1` agents: twice the per-capita bound on how much one agent's
/// report can move the conditional expected budget,
/// `(2 / n) [sqrt(n-1) (sigma_psih / sigma_h) phi((alpha - h_cap) /
/// (sqrt(n-1) sigma_h)) + (n-1)^{1/4} band + cost + cap]`.
///
/// `bundle` holds the averaged moments of the *other* `n - 1` agents; `cap`
/// and `h_cap` are the deviating agent's support cap and its transform.
pub fn gamma_bound(
    bundle: &MomentBundle,
    alpha: f64,
    cost: f64,
    cap: f64,
    h_cap: f64,
    constants: &Constants,
) -> Result<f64, TheoryError> {
    if !(cost.is_finite() && cost >= 0.0) {
        return Err(TheoryError::Domain(format!("cost must be finite and >= 0, got {cost}")));
    }
    if !(cap.is_finite() && cap >= 0.0 && h_cap.is_finite()) {
        return Err(TheoryError::Domain("need a finite support cap and transformed cap".into()));
    }
    if alpha.is_nan() {
        return Err(TheoryError::Domain("threshold must not be NaN".into()));
    }
    let m = bundle.n as f64;
    let n = m + 1.0;
    let sigma_h = bundle.sigma2_h.sqrt();
    let shift = m.sqrt()
        * (bundle.sigma_psih / sigma_h)
        * phi((alpha - h_cap) / (m.sqrt() * sigma_h));
    let band = m.powf(0.25) * band_factor(bundle, BandKind::Bivariate, constants)?;
    Ok(2.0 / n * (shift + band + cost + cap))
}

/// Lower bound on the profit ratio of the mean-adjusted transformed rule
/// against the optimal one: the correlation between the virtual and
/// transformed valuations.
pub fn profit_ratio_bound(bundle: &MomentBundle) -> f64 {
    bundle.correlation()
}

/// Profit-ratio floor for decreasing-hazard-rate valuations with the
/// identity transform: `(sqrt(2)/2) sqrt(1 + mean^2 / variance)`.
pub fn dhr_profit_bound(mean: f64, variance: f64) -> Result<f64, TheoryError> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(TheoryError::Domain("mean must be finite and nonnegative".into()));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(TheoryError::Domain("variance must be positive".into()));
    }
    Ok(std::f64::consts::SQRT_2 / 2.0 * (1.0 + mean * mean / variance).sqrt())
}
