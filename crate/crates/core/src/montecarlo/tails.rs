use super::engine::fold_replications;
use super::estimate::{Estimate, MeanAcc};
use super::{
    check_failures, check_profile_inputs, check_replications, sample_profile, McError, RngPlan,
};
use crate::distributions::ValuationDistribution;
use crate::mechanisms::{Mechanism, Scratch};
use std::sync::Arc;

/// Relative tolerance for the accounting-identity event: exact float
/// inequality on `W + B = W*` is meaningless.
const IDENTITY_TOL: f64 = 1e-9;

/// Empirical frequencies of the two ex post failure events.
#[derive(Debug, Clone)]
pub struct TailReport {
    pub delta: f64,
    /// Frequency of `W <= delta * W*`.
    pub low_welfare: Estimate,
    /// Frequency of `|W + B - W*| > 1e-9 * (|sum v| + c)`: the mechanism's
    /// decision disagreed with first-best.
    pub identity_mismatch: Estimate,
    pub replications: u64,
    pub failures: u64,
}

/// Estimate ex post tail probabilities for bounded-support profiles:
/// the low-welfare event `W <= delta W*` and the accounting mismatch
/// `W + B != W*`. Standard errors are binomial.
pub fn estimate_ex_post_tails(
    mechanism: &Mechanism,
    dists: &[Arc<ValuationDistribution>],
    delta: f64,
    replications: u64,
    plan: &RngPlan,
    workers: Option<usize>,
) -> Result<TailReport, McError> {
    check_replications(replications)?;
    check_profile_inputs(mechanism.n(), dists)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(McError::InvalidParameter(format!(
            "delta {delta} must lie in (0, 1)"
        )));
    }
    if dists.iter().any(|d| !d.support().1.is_finite()) {
        return Err(McError::UnboundedSupport);
    }
    let cost = mechanism.cost();

    struct Acc {
        ok: u64,
        failed: u64,
        low: MeanAcc,
        mismatch: MeanAcc,
        scratch: Scratch,
        values: Vec<f64>,
    }
    let acc = fold_replications(
        replications,
        workers,
        || Acc {
            ok: 0,
            failed: 0,
            low: MeanAcc::new(),
            mismatch: MeanAcc::new(),
            scratch: Scratch::default(),
            values: Vec::new(),
        },
        |acc, r| {
            let mut rng = plan.replication_rng(r);
            sample_profile(dists, &mut rng, &mut acc.values);
            match mechanism.evaluate_into(&acc.values, &mut acc.scratch) {
                Ok(s) => {
                    acc.ok += 1;
                    let low = s.welfare <= delta * s.efficient_welfare;
                    acc.low.push(if low { 1.0 } else { 0.0 });
                    let scale = s.sum_values.abs() + cost;
                    let gap = (s.welfare + s.budget - s.efficient_welfare).abs();
                    acc.mismatch
                        .push(if gap > IDENTITY_TOL * scale { 1.0 } else { 0.0 });
                }
                Err(_) => acc.failed += 1,
            }
        },
        |a, b| {
            a.ok += b.ok;
            a.failed += b.failed;
            a.low.merge(&b.low);
            a.mismatch.merge(&b.mismatch);
        },
    );
    check_failures(acc.failed, replications)?;
    Ok(TailReport {
        delta,
        low_welfare: acc.low.estimate(acc.ok),
        identity_mismatch: acc.mismatch.estimate(acc.ok),
        replications: acc.ok,
        failures: acc.failed,
    })
}

/// Evaluate the empirical version of `E[X 1{Y >= alpha}]` through its tail
/// integrals,
/// `int_0^inf P(X > x, Y >= alpha) dx - int_{-inf}^0 P(X < x, Y >= alpha) dx`,
/// as literal step-function integrals over the sample. Equals the direct
/// sample mean of `X 1{Y >= alpha}` up to summation rounding, which makes
/// it an independent route for cross-checking truncated-mean estimates.
pub fn truncated_mean_via_tail(samples: &[(f64, f64)], alpha: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let r = samples.len() as f64;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &(x, y) in samples {
        if y >= alpha {
            if x > 0.0 {
                pos.push(x);
            } else if x < 0.0 {
                neg.push(x);
            }
        }
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);

    // Between consecutive order statistics the joint survivor count is
    // constant, so each integral is a finite sum of box areas.
    let mut upper = 0.0;
    let mut prev = 0.0;
    for (k, &x) in pos.iter().enumerate() {
        upper += (x - prev) * (pos.len() - k) as f64;
        prev = x;
    }
    let mut lower = 0.0;
    if let Some(&first) = neg.first() {
        let mut prev = first;
        for (k, &x) in neg.iter().enumerate().skip(1) {
            lower += (x - prev) * k as f64;
            prev = x;
        }
        lower += (0.0 - prev) * neg.len() as f64;
    }
    (upper - lower) / r
}
