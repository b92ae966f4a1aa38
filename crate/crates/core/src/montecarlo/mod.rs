//! Deterministic, parallel Monte Carlo estimation of ex ante budgets,
//! welfare, incentive gains, and ex post tail events.
//!
//! Every replication draws from a counter-based substream keyed by
//! (seed, replication, agent), so estimates are bit-identical across
//! worker-thread counts. Batches fold into accumulators in a fixed order.

mod conditional;
mod engine;
mod estimate;
mod exante;
mod incentives;
mod profit;
mod rng;
mod tails;

pub use conditional::{estimate_conditional_budget, McConditionalBudget};
pub use estimate::Estimate;
pub use exante::{estimate_exante, ExAnteReport};
pub use incentives::{probe_incentives, IncentivesReport};
pub use profit::{compare_profit, ProfitComparison};
pub use rng::RngPlan;
pub use tails::{estimate_ex_post_tails, truncated_mean_via_tail, TailReport};

use crate::distributions::{DistError, ValuationDistribution};
use crate::mechanisms::MechError;
use rand::Rng;
use std::sync::Arc;

/// Fewer replications than this produce meaningless standard errors.
pub const MIN_REPLICATIONS: u64 = 100;

/// Fraction of failed replications above which a run is rejected rather
/// than reported, to keep silent selection bias out of the estimates.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error("need at least {min} replications, got {got}")]
    TooFewReplications { got: u64, min: u64 },
    #[error("{failed} of {total} replications failed, exceeding the {MAX_FAILURE_RATE} tolerance")]
    ExcessiveFailures { failed: u64, total: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation requires bounded valuation supports")]
    UnboundedSupport,
    #[error(transparent)]
    Mech(#[from] MechError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Draw one profile: agent `j` consumes the `j`-th uniform of the stream.
#[inline]
pub(crate) fn sample_profile(
    dists: &[Arc<ValuationDistribution>],
    rng: &mut rand_chacha::ChaCha8Rng,
    out: &mut Vec<f64>,
) {
    out.clear();
    for d in dists {
        out.push(d.sample(rng.random::<f64>()));
    }
}

pub(crate) fn check_replications(r: u64) -> Result<(), McError> {
    if r < MIN_REPLICATIONS {
        return Err(McError::TooFewReplications {
            got: r,
            min: MIN_REPLICATIONS,
        });
    }
    Ok(())
}

pub(crate) fn check_failures(failed: u64, total: u64) -> Result<(), McError> {
    if failed as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(McError::ExcessiveFailures { failed, total });
    }
    Ok(())
}

pub(crate) fn check_profile_inputs(
    n: usize,
    dists: &[Arc<ValuationDistribution>],
) -> Result<(), McError> {
    if dists.len() != n {
        return Err(McError::InvalidParameter(format!(
            "mechanism has {n} agents but {} distributions were supplied",
            dists.len()
        )));
    }
    Ok(())
}
