use super::engine::fold_replications;
use super::estimate::{delta_ratio_se, CrossAcc, Estimate, MeanAcc};
use super::{
    check_failures, check_profile_inputs, check_replications, sample_profile, McError, RngPlan,
};
use crate::distributions::ValuationDistribution;
use crate::mechanisms::{Mechanism, Scratch};
use std::sync::Arc;

/// Ex ante estimates for one mechanism at one population size, all from
/// common random numbers so differences between fields are low-variance.
#[derive(Debug, Clone)]
pub struct ExAnteReport {
    pub n: usize,
    /// Successful replications backing every estimate.
    pub replications: u64,
    pub failures: u64,
    /// Mean adjustment actually used, when the rule is mean-adjusted.
    pub alpha: Option<f64>,
    pub cost: f64,
    /// Ex post budget `sum t_i - cost * q`.
    pub budget: Estimate,
    /// Agents' welfare `sum_i (v_i q - t_i)`.
    pub welfare: Estimate,
    /// First-best welfare `max(sum v - cost, 0)`.
    pub efficient_welfare: Estimate,
    /// Provision probability `P(q = 1)`.
    pub provision: Estimate,
    /// Regret ratio `(E[W*] - E[W]) / E[W*]`, delta-method standard error.
    /// NaN when the efficient-welfare estimate is not positive.
    pub regret_ratio: Estimate,
    /// Welfare lost to provision decisions that differ from first-best,
    /// `E[(sum v - cost) (1{sum v >= cost} - q)]`. On common draws this
    /// equals `E[W*] - E[W] - E[B]` up to rounding.
    pub decision_gap: Estimate,
}

impl ExAnteReport {
    /// The designer's profit is the ex post budget in this setting.
    pub fn profit(&self) -> Estimate {
        self.budget
    }
}

struct Acc {
    ok: u64,
    failed: u64,
    budget: MeanAcc,
    welfare: MeanAcc,
    efficient: MeanAcc,
    provision: MeanAcc,
    gap: MeanAcc,
    w_ws: CrossAcc,
    scratch: Scratch,
    values: Vec<f64>,
}

impl Acc {
    fn new() -> Self {
        Acc {
            ok: 0,
            failed: 0,
            budget: MeanAcc::new(),
            welfare: MeanAcc::new(),
            efficient: MeanAcc::new(),
            provision: MeanAcc::new(),
            gap: MeanAcc::new(),
            w_ws: CrossAcc::new(),
            scratch: Scratch::default(),
            values: Vec::new(),
        }
    }

    fn merge(&mut self, other: Acc) {
        self.ok += other.ok;
        self.failed += other.failed;
        self.budget.merge(&other.budget);
        self.welfare.merge(&other.welfare);
        self.efficient.merge(&other.efficient);
        self.provision.merge(&other.provision);
        self.gap.merge(&other.gap);
        self.w_ws.merge(&other.w_ws);
    }
}

/// Estimate budget, welfare, provision probability, and the regret ratio
/// for `mechanism` under independent draws from `dists`.
pub fn estimate_exante(
    mechanism: &Mechanism,
    dists: &[Arc<ValuationDistribution>],
    replications: u64,
    plan: &RngPlan,
    workers: Option<usize>,
) -> Result<ExAnteReport, McError> {
    check_replications(replications)?;
    check_profile_inputs(mechanism.n(), dists)?;
    let cost = mechanism.cost();

    let acc = fold_replications(
        replications,
        workers,
        Acc::new,
        |acc, r| {
            let mut rng = plan.replication_rng(r);
            sample_profile(dists, &mut rng, &mut acc.values);
            match mechanism.evaluate_into(&acc.values, &mut acc.scratch) {
                Ok(s) => {
                    acc.ok += 1;
                    let q = if s.provided { 1.0 } else { 0.0 };
                    let efficient = if s.sum_values >= cost { 1.0 } else { 0.0 };
                    acc.budget.push(s.budget);
                    acc.welfare.push(s.welfare);
                    acc.efficient.push(s.efficient_welfare);
                    acc.provision.push(q);
                    acc.gap.push((s.sum_values - cost) * (efficient - q));
                    acc.w_ws.push(s.welfare, s.efficient_welfare);
                }
                Err(_) => acc.failed += 1,
            }
        },
        Acc::merge,
    );

    check_failures(acc.failed, replications)?;
    let r = acc.ok;
    let welfare = acc.welfare.estimate(r);
    let efficient = acc.efficient.estimate(r);

    // Regret ratio from the same sums as its components: the point value is
    // exactly (efficient.mean - welfare.mean) / efficient.mean.
    let mean_d = efficient.mean - welfare.mean;
    let var_w = acc.welfare.variance(r);
    let var_ws = acc.efficient.variance(r);
    let cov = acc.w_ws.covariance(&acc.welfare, &acc.efficient, r);
    let var_d = (var_ws + var_w - 2.0 * cov).max(0.0);
    let regret_ratio = if efficient.mean > 0.0 {
        Estimate {
            mean: mean_d / efficient.mean,
            se: delta_ratio_se(mean_d, var_d, efficient.mean, var_ws, var_ws - cov, r),
            replications: r,
            exact_zero: welfare.exact_zero && efficient.exact_zero,
        }
    } else {
        Estimate {
            mean: f64::NAN,
            se: f64::NAN,
            replications: r,
            exact_zero: false,
        }
    };

    Ok(ExAnteReport {
        n: mechanism.n(),
        replications: r,
        failures: acc.failed,
        alpha: mechanism.rule().alpha(),
        cost,
        budget: acc.budget.estimate(r),
        welfare,
        efficient_welfare: efficient,
        provision: acc.provision.estimate(r),
        regret_ratio,
        decision_gap: acc.gap.estimate(r),
    })
}
