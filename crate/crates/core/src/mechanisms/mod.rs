//! Decision rules, pivotal transfers, and budget-rebate schemes.
//!
//! The decision statistic is `sum_i h_i(v_i)` compared against either a
//! mean-adjusted threshold `sum_i mu_{h,i} + alpha_n` or an absolute one.
//! Pivotal transfers charge each agent the smallest valuation that still
//! triggers provision given the others' reports, which makes truthful
//! reporting dominant and participation ex post individually rational.

mod mechanism;
mod rule;

pub use mechanism::{ConditionalBudget, Mechanism, Outcome, TransferScheme, ZeroConditional};
pub(crate) use mechanism::Scratch;
pub use rule::{pivotal_value, DecisionRule, Threshold};

use crate::distributions::{DistError, MonotoneMap, ValuationDistribution};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum MechError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("expected {expected} agents, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("pairwise rebates need an even number of agents, got {n}")]
    OddAgentCount { n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("utility is not strictly increasing in the valuation near v = {v}")]
    NonMonotoneUtility { v: f64 },
    #[error("budget estimator failed: {0}")]
    Estimator(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// A validated profile of reported valuations.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile(Vec<f64>);

impl Profile {
    pub fn new(values: Vec<f64>) -> Result<Self, MechError> {
        if values.is_empty() {
            return Err(MechError::InvalidProfile("profile is empty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(MechError::InvalidProfile(format!(
                    "valuation {v} at index {i} must be finite and nonnegative"
                )));
            }
        }
        Ok(Profile(values))
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Reduce a non-binary allocation problem to the binary mechanism: with the
/// quantity fixed at `q_bar`, the induced valuation is the pushforward of
/// `V` under `v -> utility(v, q_bar)`.
///
/// The utility must be strictly increasing in `v` at `q_bar`; running any
/// mechanism on profiles of induced valuations reproduces the binary-case
/// outcomes by construction.
pub fn reduced_form_wrap(
    utility: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    q_bar: f64,
    dist: Arc<ValuationDistribution>,
) -> Result<ValuationDistribution, MechError> {
    if !(q_bar.is_finite() && q_bar > 0.0) {
        return Err(MechError::InvalidParameter("quantity level must be positive".into()));
    }
    let map = MonotoneMap::new(move |v| utility(v, q_bar));
    ValuationDistribution::monotone_pushforward(dist, map).map_err(|e| match e {
        DistError::NonMonotoneMap { v } => MechError::NonMonotoneUtility { v },
        other => MechError::Dist(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_validation() {
        assert!(Profile::new(vec![]).is_err());
        assert!(Profile::new(vec![0.5, -0.1]).is_err());
        assert!(Profile::new(vec![0.5, f64::NAN]).is_err());
        assert!(Profile::new(vec![0.5, f64::INFINITY]).is_err());
        let p = Profile::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(p.values(), &[0.5, 0.25]);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn reduced_form_square_utility() {
        let base = Arc::new(ValuationDistribution::uniform(0.0, 1.0).unwrap());
        let d = reduced_form_wrap(|v, q| v * v * q, 1.0, base).unwrap();
        approx::assert_relative_eq!(d.mean().unwrap(), 1.0 / 3.0, epsilon = 1e-7);
        approx::assert_relative_eq!(d.cdf(0.25), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn reduced_form_rejects_decreasing_utility() {
        let base = Arc::new(ValuationDistribution::uniform(0.0, 1.0).unwrap());
        let err = reduced_form_wrap(|v, q| -v * q, 1.0, base);
        assert!(matches!(err, Err(MechError::NonMonotoneUtility { .. })));
    }
}
