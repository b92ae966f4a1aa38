use super::rule::DecisionRule;
use super::{MechError, Profile};
use std::sync::Arc;

/// Estimates of the pivotal mechanism's expected budget, used by the
/// interim rebate scheme. `conditional(i, v)` is the expected budget given
/// agent `i` reports `v`; `unconditional` is the ex ante expectation.
pub trait ConditionalBudget: Send + Sync {
    fn conditional(&self, i: usize, v_i: f64) -> Result<f64, MechError>;
    fn unconditional(&self) -> Result<f64, MechError>;
}

/// Degenerate estimator that treats the expected budget as zero. Useful in
/// tests: the resulting transfers shift the whole realized budget onto the
/// first agent of each pair.
pub struct ZeroConditional;

impl ConditionalBudget for ZeroConditional {
    fn conditional(&self, _i: usize, _v: f64) -> Result<f64, MechError> {
        Ok(0.0)
    }
    fn unconditional(&self) -> Result<f64, MechError> {
        Ok(0.0)
    }
}

/// Which transfer payments accompany the decision rule.
#[derive(Clone)]
pub enum TransferScheme {
    /// Dominant-strategy transfers: each provided agent pays her pivotal
    /// valuation, capped at `b_i` when caps are set.
    Pivotal,
    /// Interim rebates within consecutive pairs. Keeps interim payments,
    /// hence incentives and participation, unchanged, and makes the ex post
    /// budget equal the estimator's unconditional expected budget.
    PairedRebate(Arc<dyn ConditionalBudget>),
    /// Everyone rebates an equal share of the realized budget, balancing it
    /// exactly at the price of approximate incentives.
    ProRataRebate,
}

impl std::fmt::Debug for TransferScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransferScheme::Pivotal => write!(f, "Pivotal"),
            TransferScheme::PairedRebate(_) => write!(f, "PairedRebate(..)"),
            TransferScheme::ProRataRebate => write!(f, "ProRataRebate"),
        }
    }
}

/// Realized result for one profile.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub provided: bool,
    pub transfers: Vec<f64>,
    /// `sum_i t_i - cost * q`.
    pub budget: f64,
    /// Sum of agent utilities `sum_i (v_i q - t_i)`.
    pub welfare: f64,
    /// First-best welfare `max(sum_i v_i - cost, 0)`.
    pub efficient_welfare: f64,
}

/// Per-profile aggregates without the transfer vector, for hot loops.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Summary {
    pub provided: bool,
    pub sum_values: f64,
    pub budget: f64,
    pub welfare: f64,
    pub efficient_welfare: f64,
}

/// Reusable buffers for repeated evaluation.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    pub h: Vec<f64>,
    pub t: Vec<f64>,
}

/// A decision rule bundled with a provision cost, optional valuation caps,
/// and a transfer scheme.
#[derive(Debug, Clone)]
pub struct Mechanism {
    rule: DecisionRule,
    cost: f64,
    caps: Option<Vec<f64>>,
    scheme: TransferScheme,
}

impl Mechanism {
    pub fn new(rule: DecisionRule, cost: f64) -> Result<Self, MechError> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(MechError::InvalidParameter(
                "cost must be finite and nonnegative".into(),
            ));
        }
        Ok(Mechanism {
            rule,
            cost,
            caps: None,
            scheme: TransferScheme::Pivotal,
        })
    }

    /// Cap each agent's charge at `caps[i]`. Entries must be positive;
    /// `+inf` leaves an agent uncapped.
    pub fn with_caps(mut self, caps: Vec<f64>) -> Result<Self, MechError> {
        if caps.len() != self.rule.n() {
            return Err(MechError::LengthMismatch {
                expected: self.rule.n(),
                got: caps.len(),
            });
        }
        if let Some(bad) = caps.iter().find(|b| !(**b > 0.0)) {
            return Err(MechError::InvalidParameter(format!(
                "cap {bad} must be positive"
            )));
        }
        self.caps = Some(caps);
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: TransferScheme) -> Result<Self, MechError> {
        if matches!(scheme, TransferScheme::PairedRebate(_)) && self.rule.n() % 2 != 0 {
            return Err(MechError::OddAgentCount { n: self.rule.n() });
        }
        self.scheme = scheme;
        Ok(self)
    }

    pub fn rule(&self) -> &DecisionRule {
        &self.rule
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn caps(&self) -> Option<&[f64]> {
        self.caps.as_deref()
    }

    pub fn scheme(&self) -> &TransferScheme {
        &self.scheme
    }

    pub fn n(&self) -> usize {
        self.rule.n()
    }

    pub fn evaluate(&self, profile: &Profile) -> Result<Outcome, MechError> {
        let mut scratch = Scratch::default();
        let summary = self.evaluate_into(profile.values(), &mut scratch)?;
        Ok(Outcome {
            provided: summary.provided,
            transfers: scratch.t,
            budget: summary.budget,
            welfare: summary.welfare,
            efficient_welfare: summary.efficient_welfare,
        })
    }

    pub(crate) fn evaluate_into(
        &self,
        values: &[f64],
        scratch: &mut Scratch,
    ) -> Result<Summary, MechError> {
        let n = self.rule.n();
        let total = self.rule.score_into(values, &mut scratch.h)?;
        let provided = total >= self.rule.threshold_value();
        let sum_values: f64 = values.iter().sum();
        let efficient_welfare = (sum_values - self.cost).max(0.0);

        scratch.t.clear();
        scratch.t.resize(n, 0.0);
        if provided {
            self.pivotal_transfers(values, &scratch.h, total, &mut scratch.t)?;
        }
        let q = if provided { 1.0 } else { 0.0 };
        let base_sum: f64 = scratch.t.iter().sum();
        let base_budget = base_sum - self.cost * q;

        let (sum_transfers, budget) = match &self.scheme {
            TransferScheme::Pivotal => (base_sum, base_budget),
            TransferScheme::ProRataRebate => {
                let share = base_budget / n as f64;
                for t in scratch.t.iter_mut() {
                    *t -= share;
                }
                // The rebate balances the budget identically; the reported
                // value is exact while the transfers carry the rounding.
                (self.cost * q, 0.0)
            }
            TransferScheme::PairedRebate(est) => {
                let uncond = est.unconditional()?;
                let w = 2.0 / n as f64;
                for k in (0..n).step_by(2) {
                    let cond = est.conditional(k, values[k])?;
                    scratch.t[k] -= w * (base_budget - cond);
                    scratch.t[k + 1] -= w * (cond - uncond);
                }
                let s: f64 = scratch.t.iter().sum();
                (s, s - self.cost * q)
            }
        };

        let welfare = match &self.scheme {
            // Keep the accounting identity welfare + budget = (sum v - c) q
            // exact when the budget is exactly balanced.
            TransferScheme::ProRataRebate => (sum_values - self.cost) * q,
            _ => sum_values * q - sum_transfers,
        };

        Ok(Summary {
            provided,
            sum_values,
            budget,
            welfare,
            efficient_welfare,
        })
    }

    /// Transfers of the base dominant-strategy mechanism, assuming the good
    /// is provided: `t_i = min(pivot_i, b_i)` with `pivot_i >= 0`.
    fn pivotal_transfers(
        &self,
        values: &[f64],
        hvals: &[f64],
        total: f64,
        out: &mut [f64],
    ) -> Result<(), MechError> {
        let tau = self.rule.threshold_value();
        for i in 0..values.len() {
            let needed = tau - (total - hvals[i]);
            // Provision means needed <= h_i(v_i), so v_i brackets the pivot.
            let pivot = self
                .rule
                .transform(i)
                .inverse_at_least(needed, Some(values[i]))?;
            let mut t = pivot.max(0.0);
            if let Some(caps) = &self.caps {
                t = t.min(caps[i]);
            }
            out[i] = t;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Transform;

    fn two_agent_mechanism(cost: f64) -> Mechanism {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity, Transform::Identity],
            vec![0.5, 0.5],
            -0.3,
        )
        .unwrap();
        Mechanism::new(rule, cost).unwrap()
    }

    #[test]
    fn pivotal_outcome_matches_hand_values() {
        let m = two_agent_mechanism(0.1);
        let out = m.evaluate(&Profile::new(vec![0.5, 0.4]).unwrap()).unwrap();
        assert!(out.provided);
        approx::assert_abs_diff_eq!(out.transfers[0], 0.3, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.transfers[1], 0.2, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.budget, 0.4, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.welfare, 0.4, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.efficient_welfare, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn no_provision_means_no_transfers() {
        let m = two_agent_mechanism(0.1);
        let out = m.evaluate(&Profile::new(vec![0.2, 0.1]).unwrap()).unwrap();
        assert!(!out.provided);
        assert_eq!(out.transfers, vec![0.0, 0.0]);
        assert_eq!(out.budget, 0.0);
        assert_eq!(out.welfare, 0.0);
        approx::assert_abs_diff_eq!(out.efficient_welfare, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn caps_bind_on_transfers_not_decisions() {
        let m = two_agent_mechanism(0.1).with_caps(vec![0.25, 1.0]).unwrap();
        let out = m.evaluate(&Profile::new(vec![0.5, 0.4]).unwrap()).unwrap();
        assert!(out.provided);
        approx::assert_abs_diff_eq!(out.transfers[0], 0.25, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.transfers[1], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn pro_rata_balances_exactly() {
        let m = two_agent_mechanism(0.1)
            .with_scheme(TransferScheme::ProRataRebate)
            .unwrap();
        let out = m.evaluate(&Profile::new(vec![0.5, 0.4]).unwrap()).unwrap();
        // Base budget 0.4 is rebated in equal shares of 0.2.
        approx::assert_abs_diff_eq!(out.transfers[0], 0.1, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.transfers[1], 0.0, epsilon = 1e-12);
        assert_eq!(out.budget, 0.0);
        approx::assert_abs_diff_eq!(out.welfare, 0.8, epsilon = 1e-12);
        let sum: f64 = out.transfers.iter().sum();
        approx::assert_abs_diff_eq!(sum, m.cost(), epsilon = 1e-12);
    }

    #[test]
    fn pro_rata_rebates_nothing_without_provision() {
        let m = two_agent_mechanism(0.1)
            .with_scheme(TransferScheme::ProRataRebate)
            .unwrap();
        let out = m.evaluate(&Profile::new(vec![0.2, 0.1]).unwrap()).unwrap();
        assert_eq!(out.transfers, vec![0.0, 0.0]);
        assert_eq!(out.budget, 0.0);
        assert_eq!(out.welfare, 0.0);
    }

    struct ConstantConditional {
        cond: f64,
        uncond: f64,
    }

    impl ConditionalBudget for ConstantConditional {
        fn conditional(&self, _i: usize, _v: f64) -> Result<f64, MechError> {
            Ok(self.cond)
        }
        fn unconditional(&self) -> Result<f64, MechError> {
            Ok(self.uncond)
        }
    }

    #[test]
    fn paired_rebate_shifts_budget_within_pairs() {
        let est = Arc::new(ConstantConditional {
            cond: 0.05,
            uncond: 0.02,
        });
        let m = two_agent_mechanism(0.1)
            .with_scheme(TransferScheme::PairedRebate(est))
            .unwrap();
        let out = m.evaluate(&Profile::new(vec![0.5, 0.4]).unwrap()).unwrap();
        // Base transfers (0.3, 0.2) and base budget 0.4 with n = 2:
        // agent 1 pays 0.3 - (0.4 - 0.05), agent 2 pays 0.2 - (0.05 - 0.02).
        approx::assert_abs_diff_eq!(out.transfers[0], -0.05, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.transfers[1], 0.17, epsilon = 1e-12);
        // Ex post budget equals the estimator's unconditional expectation.
        approx::assert_abs_diff_eq!(out.budget, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn paired_rebate_with_zero_estimator_balances() {
        let m = two_agent_mechanism(0.1)
            .with_scheme(TransferScheme::PairedRebate(Arc::new(ZeroConditional)))
            .unwrap();
        let out = m.evaluate(&Profile::new(vec![0.5, 0.4]).unwrap()).unwrap();
        approx::assert_abs_diff_eq!(out.transfers[0], -0.1, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.transfers[1], 0.2, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(out.budget, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn paired_rebate_requires_even_agents() {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity; 3],
            vec![0.5; 3],
            -0.3,
        )
        .unwrap();
        let m = Mechanism::new(rule, 0.1).unwrap();
        let err = m.with_scheme(TransferScheme::PairedRebate(Arc::new(ZeroConditional)));
        assert!(matches!(err, Err(MechError::OddAgentCount { n: 3 })));
    }

    #[test]
    fn accounting_identity_holds() {
        let m = two_agent_mechanism(0.3);
        for vals in [[0.5, 0.4], [0.9, 0.85], [0.1, 0.05], [0.7, 0.0]] {
            let out = m.evaluate(&Profile::new(vals.to_vec()).unwrap()).unwrap();
            let q = if out.provided { 1.0 } else { 0.0 };
            let lhs = out.welfare + out.budget;
            let rhs = (vals.iter().sum::<f64>() - m.cost()) * q;
            approx::assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_cost_and_caps_are_rejected() {
        let rule = DecisionRule::efficient(2, 0.5).unwrap();
        assert!(Mechanism::new(rule.clone(), f64::NAN).is_err());
        assert!(Mechanism::new(rule.clone(), -0.5).is_err());
        let m = Mechanism::new(rule.clone(), 0.5).unwrap();
        assert!(m.clone().with_caps(vec![1.0]).is_err());
        assert!(m.clone().with_caps(vec![1.0, 0.0]).is_err());
        assert!(m.with_caps(vec![1.0, f64::INFINITY]).is_ok());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let m = two_agent_mechanism(0.1);
        let p = Profile::new(vec![0.5]).unwrap();
        assert!(matches!(
            m.evaluate(&p),
            Err(MechError::LengthMismatch { expected: 2, got: 1 })
        ));
    }
}
