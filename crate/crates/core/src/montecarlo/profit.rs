use super::engine::fold_replications;
use super::estimate::{delta_ratio_se, CrossAcc, Estimate, MeanAcc};
use super::{check_failures, check_replications, McError, RngPlan};
use crate::distributions::{transform_mean, Transform, ValuationDistribution};
use rand::Rng;
use std::sync::Arc;

/// Profits of the centered `h`-threshold rule and the virtual-valuation
/// rule on common draws, with the ratio of the two.
#[derive(Debug, Clone)]
pub struct ProfitComparison {
    pub n: usize,
    pub cost: f64,
    /// Expected profit of `1{sum (h(V_i) - mu_h) >= cost}`.
    pub profit_h: Estimate,
    /// Expected profit of `1{sum psi(V_i) >= cost}`, the virtual-surplus
    /// maximizing threshold rule.
    pub profit_psi: Estimate,
    /// `profit_h / profit_psi`, delta-method standard error.
    pub ratio: f64,
    pub ratio_se: f64,
    pub replications: u64,
    pub failures: u64,
}

/// Compare the designer's profit under the `h`-rule against the
/// virtual-valuation rule for i.i.d. agents.
///
/// For any thresholded rule with pivotal transfers, expected revenue equals
/// the expected virtual surplus of the provision region (payoff equivalence
/// with zero utility at the bottom), so profit is estimated as
/// `E[(sum psi(V_i) - cost) q]` for both rules. Common draws make the
/// ratio's standard error small, and the `h = psi` case gives exactly 1.
pub fn compare_profit(
    dist: &Arc<ValuationDistribution>,
    h: &Transform,
    n: usize,
    cost: f64,
    replications: u64,
    plan: &RngPlan,
    workers: Option<usize>,
) -> Result<ProfitComparison, McError> {
    check_replications(replications)?;
    if n == 0 {
        return Err(McError::InvalidParameter("need at least one agent".into()));
    }
    if !(cost.is_finite() && cost >= 0.0) {
        return Err(McError::InvalidParameter(
            "cost must be finite and nonnegative".into(),
        ));
    }
    // Virtual valuations are mean zero by construction; using the exact
    // zero keeps h = psi literally the same statistic on both routes.
    let mu_h = match h {
        Transform::Virtual(inner) if Arc::ptr_eq(inner, dist) => 0.0,
        _ => transform_mean(dist, h)?,
    };

    struct Acc {
        ok: u64,
        failed: u64,
        x: MeanAcc,
        y: MeanAcc,
        xy: CrossAcc,
    }
    let acc = fold_replications(
        replications,
        workers,
        || Acc {
            ok: 0,
            failed: 0,
            x: MeanAcc::new(),
            y: MeanAcc::new(),
            xy: CrossAcc::new(),
        },
        |acc, r| {
            let mut rng = plan.replication_rng(r);
            let mut s_psi = 0.0;
            let mut s_hc = 0.0;
            for _ in 0..n {
                let v = dist.sample(rng.random::<f64>());
                let psi = match dist.virtual_valuation(v) {
                    Ok(p) => p,
                    Err(_) => {
                        acc.failed += 1;
                        return;
                    }
                };
                let hv = match h.eval(v) {
                    Ok(hv) => hv,
                    Err(_) => {
                        acc.failed += 1;
                        return;
                    }
                };
                s_psi += psi;
                s_hc += hv - mu_h;
            }
            acc.ok += 1;
            let surplus = s_psi - cost;
            let x = if s_hc >= cost { surplus } else { 0.0 };
            let y = if s_psi >= cost { surplus } else { 0.0 };
            acc.x.push(x);
            acc.y.push(y);
            acc.xy.push(x, y);
        },
        |a, b| {
            a.ok += b.ok;
            a.failed += b.failed;
            a.x.merge(&b.x);
            a.y.merge(&b.y);
            a.xy.merge(&b.xy);
        },
    );
    check_failures(acc.failed, replications)?;

    let r = acc.ok;
    let profit_h = acc.x.estimate(r);
    let profit_psi = acc.y.estimate(r);
    let (ratio, ratio_se) = if profit_psi.mean != 0.0 {
        let cov = acc.xy.covariance(&acc.x, &acc.y, r);
        (
            profit_h.mean / profit_psi.mean,
            delta_ratio_se(
                profit_h.mean,
                acc.x.variance(r),
                profit_psi.mean,
                acc.y.variance(r),
                cov,
                r,
            ),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ProfitComparison {
        n,
        cost,
        profit_h,
        profit_psi,
        ratio,
        ratio_se,
        replications: r,
        failures: acc.failed,
    })
}
