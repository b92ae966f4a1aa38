//! Closed-form predictions and finite-sample bounds for mean-adjusted
//! threshold mechanisms.
//!
//! Everything here is a pure function of averaged moments ([`MomentBundle`])
//! and schedule parameters: truncated joint-normal means, normal-approximation
//! error bands, expected-budget and regret-ratio bounds, exponential tail
//! bounds for ex post events, an approximate-incentive bound, profit ratio
//! floors, and finite-grid growth-rate diagnostics. Simulation counterparts
//! live in [`crate::montecarlo`]; integration tests cross-check the two.
//!
//! The universal constants in the normal-approximation bounds are knobs
//! ([`Constants`]), since only their existence is guaranteed; changing them
//! rescales band widths but never changes mechanism behavior.

mod bounds;
mod rates;

pub use bounds::{
    be_bound_uni, be_bound_multi, budget_bounds, dhr_profit_bound, gamma_bound,
    hoeffding_ex_post, normal_truncated_mean, profit_ratio_bound, regret_upper_bound,
    truncated_mean_bounds, BandKind, BoundReport, HoeffdingBounds,
};
pub use rates::{
    check_rate_membership, default_grid, fit_loglog_slope, RateCheck, RateSchedule, Relation,
};

use crate::distributions::DistError;

/// Universal constants for the normal-approximation error bounds.
///
/// `c1` scales the univariate bound (independent, non-identically distributed
/// summands); `c2` scales the bivariate convex-set bound. The defaults are
/// conservative published estimates. Larger values widen every band and bound
/// that uses them; nothing else depends on them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c1: 0.56, c2: 70.0 }
    }
}

impl Constants {
    pub fn new(c1: f64, c2: f64) -> Result<Self, TheoryError> {
        if !(c1.is_finite() && c1 > 0.0 && c2.is_finite() && c2 > 0.0) {
            return Err(TheoryError::Domain(
                "approximation constants must be finite and positive".into(),
            ));
        }
        Ok(Constants { c1, c2 })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TheoryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants() {
        let c = Constants::default();
        assert_eq!(c.c1, 0.56);
        assert_eq!(c.c2, 70.0);
    }

    #[test]
    fn constants_validated() {
        assert!(Constants::new(0.4748, 42.0).is_ok());
        assert!(Constants::new(0.0, 1.0).is_err());
        assert!(Constants::new(1.0, -2.0).is_err());
        assert!(Constants::new(f64::NAN, 1.0).is_err());
    }
}
