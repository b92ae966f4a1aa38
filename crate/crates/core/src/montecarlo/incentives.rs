use super::engine::fold_replications;
use super::estimate::{Estimate, MeanAcc};
use super::{
    check_failures, check_profile_inputs, check_replications, sample_profile, McError, RngPlan,
};
use crate::distributions::ValuationDistribution;
use crate::mechanisms::{Mechanism, Scratch};
use std::sync::Arc;

/// Estimated worst-case interim gain from misreporting, plus the interim
/// truth-telling utilities used for participation checks.
#[derive(Debug, Clone)]
pub struct IncentivesReport {
    pub agent: usize,
    /// Largest estimated interim gain `u(report) - u(truth)` on the grid.
    pub gamma_hat: f64,
    /// Standard error of the gain estimate at the maximizing pair.
    pub gamma_se: f64,
    pub best_value: f64,
    pub best_report: f64,
    pub value_grid: Vec<f64>,
    /// Interim expected utility of truth-telling at each value-grid point.
    pub interim_utilities: Vec<Estimate>,
    pub replications: u64,
    pub failures: u64,
}

impl IncentivesReport {
    /// The value-grid point with the lowest interim truth-telling utility.
    pub fn worst_interim(&self) -> (f64, Estimate) {
        let (idx, est) = self
            .interim_utilities
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.mean.total_cmp(&b.1.mean))
            .expect("nonempty grid");
        (self.value_grid[idx], *est)
    }
}

struct Acc {
    ok: u64,
    failed: u64,
    truth_u: Vec<MeanAcc>,
    gains: Vec<MeanAcc>,
    scratch: Scratch,
    values: Vec<f64>,
    truth_eval: Vec<(f64, f64)>,
    report_eval: Vec<(f64, f64)>,
}

/// Estimate the maximum interim utility gain agent `agent` can obtain by
/// reporting a grid point other than her value, using common random
/// numbers across all (value, report) pairs.
///
/// Truthful utility is evaluated at every `value_grid` point; deviations at
/// every `report_grid` point. Both grids must lie inside the agent's
/// support. A dominant-strategy scheme yields gains statistically
/// indistinguishable from (at most) zero.
#[allow(clippy::too_many_arguments)]
pub fn probe_incentives(
    mechanism: &Mechanism,
    dists: &[Arc<ValuationDistribution>],
    agent: usize,
    value_grid: &[f64],
    report_grid: &[f64],
    replications: u64,
    plan: &RngPlan,
    workers: Option<usize>,
) -> Result<IncentivesReport, McError> {
    check_replications(replications)?;
    check_profile_inputs(mechanism.n(), dists)?;
    if agent >= mechanism.n() {
        return Err(McError::InvalidParameter(format!(
            "agent index {agent} out of range for {} agents",
            mechanism.n()
        )));
    }
    if value_grid.is_empty() || report_grid.is_empty() {
        return Err(McError::InvalidParameter("grids must be nonempty".into()));
    }
    let (lo, hi) = dists[agent].support();
    for &v in value_grid.iter().chain(report_grid) {
        if !(v.is_finite() && v >= lo && v <= hi) {
            return Err(McError::InvalidParameter(format!(
                "grid point {v} outside the agent's support [{lo}, {hi}]"
            )));
        }
    }

    let nv = value_grid.len();
    let nr = report_grid.len();
    let acc = fold_replications(
        replications,
        workers,
        || Acc {
            ok: 0,
            failed: 0,
            truth_u: vec![MeanAcc::new(); nv],
            gains: vec![MeanAcc::new(); nv * nr],
            scratch: Scratch::default(),
            values: Vec::new(),
            truth_eval: Vec::with_capacity(nv),
            report_eval: Vec::with_capacity(nr),
        },
        |acc, r| {
            let mut rng = plan.replication_rng(r);
            sample_profile(dists, &mut rng, &mut acc.values);
            // Evaluate every report once; failures discard the whole
            // replication so all accumulators stay on common draws.
            acc.truth_eval.clear();
            acc.report_eval.clear();
            for &report in value_grid {
                acc.values[agent] = report;
                match mechanism.evaluate_into(&acc.values, &mut acc.scratch) {
                    Ok(s) => {
                        let q = if s.provided { 1.0 } else { 0.0 };
                        acc.truth_eval.push((q, acc.scratch.t[agent]));
                    }
                    Err(_) => {
                        acc.failed += 1;
                        return;
                    }
                }
            }
            for &report in report_grid {
                acc.values[agent] = report;
                match mechanism.evaluate_into(&acc.values, &mut acc.scratch) {
                    Ok(s) => {
                        let q = if s.provided { 1.0 } else { 0.0 };
                        acc.report_eval.push((q, acc.scratch.t[agent]));
                    }
                    Err(_) => {
                        acc.failed += 1;
                        return;
                    }
                }
            }
            acc.ok += 1;
            for (iv, &value) in value_grid.iter().enumerate() {
                let (q_t, t_t) = acc.truth_eval[iv];
                let u_truth = value * q_t - t_t;
                acc.truth_u[iv].push(u_truth);
                for (jr, _) in report_grid.iter().enumerate() {
                    let (q_d, t_d) = acc.report_eval[jr];
                    let u_dev = value * q_d - t_d;
                    acc.gains[iv * nr + jr].push(u_dev - u_truth);
                }
            }
        },
        |a, b| {
            a.ok += b.ok;
            a.failed += b.failed;
            for (x, y) in a.truth_u.iter_mut().zip(&b.truth_u) {
                x.merge(y);
            }
            for (x, y) in a.gains.iter_mut().zip(&b.gains) {
                x.merge(y);
            }
        },
    );
    check_failures(acc.failed, replications)?;

    let mut best = (0usize, 0usize, f64::NEG_INFINITY, f64::NAN);
    for iv in 0..nv {
        for jr in 0..nr {
            let est = acc.gains[iv * nr + jr].estimate(acc.ok);
            if est.mean > best.2 {
                best = (iv, jr, est.mean, est.se);
            }
        }
    }
    Ok(IncentivesReport {
        agent,
        gamma_hat: best.2,
        gamma_se: best.3,
        best_value: value_grid[best.0],
        best_report: report_grid[best.1],
        value_grid: value_grid.to_vec(),
        interim_utilities: acc.truth_u.iter().map(|m| m.estimate(acc.ok)).collect(),
        replications: acc.ok,
        failures: acc.failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Transform;
    use crate::mechanisms::{DecisionRule, TransferScheme};

    fn uniform_setup(n: usize, alpha: f64, cost: f64) -> (Mechanism, Vec<Arc<ValuationDistribution>>) {
        let d = Arc::new(ValuationDistribution::uniform(0.0, 1.0).unwrap());
        let rule = DecisionRule::adjusted_iid(&d, Transform::Identity, n, alpha).unwrap();
        (Mechanism::new(rule, cost).unwrap(), vec![d; n])
    }

    #[test]
    fn dominant_strategy_scheme_shows_no_gain() {
        let (m, dists) = uniform_setup(3, -0.4, 0.2);
        let rep = probe_incentives(
            &m,
            &dists,
            1,
            &[0.2, 0.5, 0.8],
            &[0.05, 0.3, 0.6, 0.95],
            4_000,
            &RngPlan::new(21),
            None,
        )
        .unwrap();
        assert!(
            rep.gamma_hat <= 4.0 * rep.gamma_se + 1e-9,
            "gamma {} se {}",
            rep.gamma_hat,
            rep.gamma_se
        );
    }

    #[test]
    fn pivotal_interim_utilities_are_nonnegative() {
        let (m, dists) = uniform_setup(4, -0.6, 0.1);
        let rep = probe_incentives(
            &m,
            &dists,
            0,
            &[0.1, 0.5, 0.9],
            &[0.5],
            3_000,
            &RngPlan::new(22),
            None,
        )
        .unwrap();
        let (value, worst) = rep.worst_interim();
        assert!(
            worst.mean >= -4.0 * worst.se - 1e-12,
            "interim utility at {value} is {}",
            worst.mean
        );
    }

    #[test]
    fn truth_only_grid_gives_exactly_zero() {
        let (m, dists) = uniform_setup(3, -0.4, 0.0);
        let rep = probe_incentives(
            &m,
            &dists,
            2,
            &[0.5],
            &[0.5],
            200,
            &RngPlan::new(23),
            None,
        )
        .unwrap();
        assert_eq!(rep.gamma_hat, 0.0);
        assert_eq!(rep.gamma_se, 0.0);
    }

    #[test]
    fn rebate_scheme_gains_stay_below_obvious_slack() {
        // Equal-share rebates are only approximately incentive compatible;
        // at small n the gain should still be tiny on a coarse grid.
        let (m, dists) = uniform_setup(4, -0.6, 0.1);
        let m = m.with_scheme(TransferScheme::ProRataRebate).unwrap();
        let rep = probe_incentives(
            &m,
            &dists,
            0,
            &[0.3, 0.7],
            &[0.1, 0.5, 0.9],
            4_000,
            &RngPlan::new(24),
            None,
        )
        .unwrap();
        assert!(rep.gamma_hat < 0.5, "gamma {}", rep.gamma_hat);
        assert_eq!(rep.failures, 0);
    }

    #[test]
    fn grid_outside_support_is_rejected() {
        let (m, dists) = uniform_setup(3, -0.4, 0.0);
        let err = probe_incentives(
            &m,
            &dists,
            0,
            &[1.5],
            &[0.5],
            200,
            &RngPlan::new(25),
            None,
        );
        assert!(matches!(err, Err(McError::InvalidParameter(_))));
    }
}
