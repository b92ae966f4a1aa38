use super::engine::fold_replications;
use super::estimate::{Estimate, MeanAcc};
use super::exante::estimate_exante;
use super::{
    check_failures, check_profile_inputs, check_replications, sample_profile, McError, RngPlan,
};
use crate::distributions::ValuationDistribution;
use crate::mechanisms::{ConditionalBudget, MechError, Mechanism, Scratch, TransferScheme};
use std::sync::Arc;

fn require_pivotal(mechanism: &Mechanism) -> Result<(), McError> {
    if !matches!(mechanism.scheme(), TransferScheme::Pivotal) {
        return Err(McError::InvalidParameter(
            "conditional budgets refer to the baseline pivotal scheme".into(),
        ));
    }
    Ok(())
}

/// Estimate `E[B | V_agent = value]`: the expected ex post budget of the
/// baseline mechanism with one report pinned and the others drawn fresh.
///
/// The full profile is drawn and the pinned slot overwritten, so agent `j`
/// consumes the same substream position as in the unconditional run.
pub fn estimate_conditional_budget(
    mechanism: &Mechanism,
    dists: &[Arc<ValuationDistribution>],
    agent: usize,
    value: f64,
    replications: u64,
    plan: &RngPlan,
    workers: Option<usize>,
) -> Result<Estimate, McError> {
    check_replications(replications)?;
    check_profile_inputs(mechanism.n(), dists)?;
    require_pivotal(mechanism)?;
    if agent >= mechanism.n() {
        return Err(McError::InvalidParameter(format!(
            "agent index {agent} out of range for {} agents",
            mechanism.n()
        )));
    }
    if !(value.is_finite() && value >= 0.0) {
        return Err(McError::InvalidParameter(format!(
            "pinned value {value} must be finite and nonnegative"
        )));
    }

    struct Acc {
        ok: u64,
        failed: u64,
        budget: MeanAcc,
        scratch: Scratch,
        values: Vec<f64>,
    }
    let acc = fold_replications(
        replications,
        workers,
        || Acc {
            ok: 0,
            failed: 0,
            budget: MeanAcc::new(),
            scratch: Scratch::default(),
            values: Vec::new(),
        },
        |acc, r| {
            let mut rng = plan.replication_rng(r);
            sample_profile(dists, &mut rng, &mut acc.values);
            acc.values[agent] = value;
            match mechanism.evaluate_into(&acc.values, &mut acc.scratch) {
                Ok(s) => {
                    acc.ok += 1;
                    acc.budget.push(s.budget);
                }
                Err(_) => acc.failed += 1,
            }
        },
        |a, b| {
            a.ok += b.ok;
            a.failed += b.failed;
            a.budget.merge(&b.budget);
        },
    );
    check_failures(acc.failed, replications)?;
    Ok(acc.budget.estimate(acc.ok))
}

/// Monte Carlo backend for the paired-rebate scheme's conditional budgets.
///
/// Holds a copy of the baseline mechanism; the unconditional expectation is
/// estimated once at construction, conditionals on demand with substreams
/// derived from the queried `(agent, value)` so repeat queries agree.
pub struct McConditionalBudget {
    mechanism: Mechanism,
    dists: Vec<Arc<ValuationDistribution>>,
    replications: u64,
    plan: RngPlan,
    unconditional: f64,
}

impl McConditionalBudget {
    pub fn new(
        mechanism: Mechanism,
        dists: Vec<Arc<ValuationDistribution>>,
        replications: u64,
        plan: RngPlan,
    ) -> Result<Self, McError> {
        require_pivotal(&mechanism)?;
        check_profile_inputs(mechanism.n(), &dists)?;
        let report = estimate_exante(
            &mechanism,
            &dists,
            replications,
            &plan.derive(u64::MAX),
            None,
        )?;
        Ok(McConditionalBudget {
            mechanism,
            dists,
            replications,
            plan,
            unconditional: report.budget.mean,
        })
    }
}

impl ConditionalBudget for McConditionalBudget {
    fn conditional(&self, agent: usize, value: f64) -> Result<f64, MechError> {
        let salt = (agent as u64).wrapping_add(value.to_bits().rotate_left(17));
        estimate_conditional_budget(
            &self.mechanism,
            &self.dists,
            agent,
            value,
            self.replications,
            &self.plan.derive(salt),
            None,
        )
        .map(|e| e.mean)
        .map_err(|e| MechError::Estimator(e.to_string()))
    }

    fn unconditional(&self) -> Result<f64, MechError> {
        Ok(self.unconditional)
    }
}
