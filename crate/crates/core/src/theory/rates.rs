//! Growth-rate schedules for the threshold adjustment and the provision
//! cost, finite-grid order-notation diagnostics, and log-log slope fitting.

use super::TheoryError;

/// Parameterized sequences used to scale the mechanism with the number of
/// agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSchedule {
    /// Threshold adjustment `-kappa sqrt(n) (ln n)^beta`. Negative; for
    /// `beta` in `(0, 1/2)` its magnitude grows faster than `sqrt(n)` but
    /// slower than `sqrt(n ln n)`, the window where provision probability
    /// tends to one while the budget stays controlled.
    Adjustment { kappa: f64, beta: f64 },
    /// Provision cost `kappa n^gamma`. Sublinear-in-`sqrt(n)` choices
    /// (`gamma < 1/2`) keep per-capita costs vanishing; faster growth is
    /// used to probe infeasibility regimes.
    Cost { kappa: f64, gamma: f64 },
}

impl RateSchedule {
    pub fn adjustment(kappa: f64, beta: f64) -> Result<Self, TheoryError> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(TheoryError::Domain(format!(
                "adjustment scale must be finite and positive, got {kappa}"
            )));
        }
        if !(beta > 0.0 && beta < 0.5) {
            return Err(TheoryError::Domain(format!(
                "adjustment log exponent must lie in (0, 1/2), got {beta}"
            )));
        }
        Ok(RateSchedule::Adjustment { kappa, beta })
    }

    pub fn cost(kappa: f64, gamma: f64) -> Result<Self, TheoryError> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(TheoryError::Domain(format!(
                "cost scale must be finite and nonnegative, got {kappa}"
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(TheoryError::Domain(format!(
                "cost exponent must be finite and nonnegative, got {gamma}"
            )));
        }
        Ok(RateSchedule::Cost { kappa, gamma })
    }

    /// `-sqrt(n) (ln n)^{1/4}`: the midpoint choice of the feasible window.
    pub fn default_adjustment() -> Self {
        RateSchedule::Adjustment { kappa: 1.0, beta: 0.25 }
    }

    /// Schedule value at `n`; callers should keep `n > 1` so the log factor
    /// is positive.
    pub fn value(&self, n: f64) -> f64 {
        match *self {
            RateSchedule::Adjustment { kappa, beta } => -kappa * n.sqrt() * n.ln().powf(beta),
            RateSchedule::Cost { kappa, gamma } => kappa * n.powf(gamma),
        }
    }

    pub fn magnitude(&self, n: f64) -> f64 {
        self.value(n).abs()
    }
}

/// Order-of-growth relations of the schedule magnitude against a reference
/// sequence. Checked as finite-grid ratio-trend diagnostics, not proofs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    /// Ratio tends to zero: strictly decreasing on the grid and the last
    /// ratio falls below 0.9 of the first.
    LittleO,
    /// Ratio stays bounded: non-increasing, or last within 1.05 of first.
    BigO,
    /// Ratio diverges: strictly increasing and last exceeds 1.1 of first.
    LittleOmega,
    /// Ratio stays bounded away from zero: non-decreasing, or last within
    /// 0.95 of first.
    BigOmega,
    /// Bounded both ways.
    Theta,
    /// Bounded against the reference damped by `n^{-eps}`: smaller by at
    /// least that polynomial factor. The exact notion asks for existence of
    /// some eps; the check fixes the one supplied.
    OEps { eps: f64 },
    /// Diverges against the reference damped by `n^{-eps}`. The exact
    /// notion quantifies over every eps; the check probes the one supplied.
    OmegaEps { eps: f64 },
}

/// Outcome of a grid diagnostic: the verdict and the ratio series behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCheck {
    pub holds: bool,
    /// `|schedule(n)| / reference(n)` at each grid point (reference damped
    /// for the eps-relations).
    pub ratios: Vec<f64>,
}

/// Ascending evaluation grid `10^3 .. 10^9` used by the built-in
/// diagnostics.
pub fn default_grid() -> Vec<f64> {
    (3..=9).map(|k| 10f64.powi(k)).collect()
}

/// Tests the schedule's growth against `reference` on `grid` by the ratio
/// trends documented on [`Relation`]. A finite grid cannot decide a limit;
/// treat the verdict as a diagnostic.
pub fn check_rate_membership(
    schedule: &RateSchedule,
    relation: Relation,
    reference: impl Fn(f64) -> f64,
    grid: &[f64],
) -> Result<RateCheck, TheoryError> {
    if grid.len() < 3 {
        return Err(TheoryError::Domain("trend diagnostics need at least three grid points".into()));
    }
    if grid.iter().any(|&n| !n.is_finite() || n <= 1.0) {
        return Err(TheoryError::Domain("grid points must be finite and exceed 1".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TheoryError::Domain("grid must be strictly ascending".into()));
    }
    let damp = match relation {
        Relation::OEps { eps } | Relation::OmegaEps { eps } => {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(TheoryError::Domain(format!(
                    "polynomial damping exponent must be positive, got {eps}"
                )));
            }
            Some(eps)
        }
        _ => None,
    };
    let mut ratios = Vec::with_capacity(grid.len());
    for &n in grid {
        let e = reference(n) * damp.map_or(1.0, |eps| n.powf(-eps));
        if !(e.is_finite() && e > 0.0) {
            return Err(TheoryError::Domain(format!(
                "reference must be finite and positive on the grid, got {e} at n = {n}"
            )));
        }
        let d = schedule.magnitude(n);
        if !(d.is_finite() && d > 0.0) {
            return Err(TheoryError::Domain(format!(
                "schedule magnitude must be finite and positive on the grid, got {d} at n = {n}"
            )));
        }
        ratios.push(d / e);
    }
    let base = match relation {
        Relation::OEps { .. } => Relation::BigO,
        Relation::OmegaEps { .. } => Relation::LittleOmega,
        r => r,
    };
    Ok(RateCheck { holds: trend_holds(base, &ratios), ratios })
}

fn trend_holds(relation: Relation, r: &[f64]) -> bool {
    let first = r[0];
    let last = r[r.len() - 1];
    match relation {
        Relation::LittleO => r.windows(2).all(|w| w[1] < w[0]) && last < 0.9 * first,
        Relation::LittleOmega => r.windows(2).all(|w| w[1] > w[0]) && last > 1.1 * first,
        Relation::BigO => {
            r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) || last <= 1.05 * first
        }
        Relation::BigOmega => {
            r.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)) || last >= 0.95 * first
        }
        Relation::Theta => trend_holds(Relation::BigO, r) && trend_holds(Relation::BigOmega, r),
        Relation::OEps { .. } | Relation::OmegaEps { .. } => {
            unreachable!("damped relations reduce to their base form before the trend test")
        }
    }
}

/// Least-squares slope of `ln value` against `ln n`; needs at least three
/// strictly positive pairs.
pub fn fit_loglog_slope(pairs: &[(f64, f64)]) -> Result<f64, TheoryError> {
    if pairs.len() < 3 {
        return Err(TheoryError::Domain("log-log fit needs at least three points".into()));
    }
    for &(n, y) in pairs {
        if !(n.is_finite() && n > 0.0 && y.is_finite() && y > 0.0) {
            return Err(TheoryError::Domain(format!(
                "log-log fit needs positive finite pairs, got ({n}, {y})"
            )));
        }
    }
    let m = pairs.len() as f64;
    let xbar = pairs.iter().map(|&(n, _)| n.ln()).sum::<f64>() / m;
    let ybar = pairs.iter().map(|&(_, y)| y.ln()).sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(n, y) in pairs {
        let dx = n.ln() - xbar;
        num += dx * (y.ln() - ybar);
        den += dx * dx;
    }
    if den <= 0.0 {
        return Err(TheoryError::Domain("log-log fit needs at least two distinct n values".into()));
    }
    Ok(num / den)
}
