//! Release gates for the toolkit, run as a plain binary so every verdict
//! line prints unconditionally, in order, whether or not earlier gates
//! fail. Each criterion prints exactly one line
//!
//!   criterion NN PASS/FAIL: measured numbers [elapsed]
//!
//! and the process exits nonzero when any gate fails. Statistical checks
//! compare Monte Carlo estimates against independent references within 4
//! standard errors; all other tolerances are pinned next to the check.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use amt_core::distributions::{
    compute_moments_iid, cov_psi_h, transform_mean, Transform, ValuationDistribution,
};
use amt_core::mechanisms::{DecisionRule, Mechanism, TransferScheme};
use amt_core::montecarlo::{
    compare_profit, estimate_ex_post_tails, estimate_exante, probe_incentives, ExAnteReport,
    RngPlan,
};
use amt_core::theory::{
    dhr_profit_bound, fit_loglog_slope, gamma_bound, hoeffding_ex_post, normal_truncated_mean,
    regret_upper_bound, Constants,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() {
    let mut failures = 0u32;

    gate(&mut failures, 1, covariance_identity);
    gate(&mut failures, 2, truncated_mean_oracle);

    // Criteria 3 and 4 read the same expensive simulation, built inside
    // gate 3 so its cost is charged where it is incurred.
    let mut fixture: Option<Vec<WelfareRow>> = None;
    gate(&mut failures, 3, || {
        let rows = welfare_fixture();
        let out = budget_positivity(&rows);
        fixture = Some(rows);
        out
    });
    gate(&mut failures, 4, || {
        let rows = fixture.as_ref().expect("welfare fixture unavailable");
        regret_convergence(rows)
    });

    gate(&mut failures, 5, revenue_ceiling);
    gate(&mut failures, 6, pivot_deficit);
    gate(&mut failures, 7, balanced_rebate_incentives);
    gate(&mut failures, 8, accounting_tails);
    gate(&mut failures, 9, hazard_profit_floor);
    gate(&mut failures, 10, cli_determinism);

    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

fn gate(failures: &mut u32, number: u32, run: impl FnOnce() -> (bool, String)) {
    let start = Instant::now();
    let verdict = catch_unwind(AssertUnwindSafe(run));
    let elapsed = start.elapsed().as_secs_f64();
    let (ok, detail) = match verdict {
        Ok(v) => v,
        Err(p) => (false, format!("panicked: {}", panic_text(&p))),
    };
    if !ok {
        *failures += 1;
    }
    let word = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {word}: {detail} [{elapsed:.1}s]");
}

fn panic_text(p: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "opaque panic payload".to_string()
    }
}

fn join(xs: &[f64], prec: usize) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.prec$}")).collect();
    format!("[{}]", parts.join(", "))
}

fn uniform01() -> ValuationDistribution {
    ValuationDistribution::uniform(0.0, 1.0).unwrap()
}

/// Criterion 1: the covariance between a valuation and its virtual
/// valuation equals E[V^2]/2, checked as simulation against quadrature
/// against the closed forms 1/6 (uniform) and 1 (exponential), plus strict
/// positivity for a mixture whose virtual valuation is non-monotone.
fn covariance_identity() -> (bool, String) {
    const DRAWS: u64 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    // E[psi(V)] = 0, so cov(V, psi(V)) is the plain mean of V psi(V).
    let mut sample_cov = |dist: &ValuationDistribution| -> (f64, f64) {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..DRAWS {
            let v = dist.sample(rng.random());
            let x = v * dist.virtual_valuation(v).unwrap();
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / DRAWS as f64;
        let var = (sumsq / DRAWS as f64 - mean * mean).max(0.0);
        (mean, (var / DRAWS as f64).sqrt())
    };

    let mut ok = true;
    let mut bits = Vec::new();
    for (name, dist, closed) in [
        ("uniform", uniform01(), 1.0 / 6.0),
        ("exponential", ValuationDistribution::exponential(1.0).unwrap(), 1.0),
    ] {
        let quad = cov_psi_h(&dist, &Transform::Identity).unwrap();
        let (mc, se) = sample_cov(&dist);
        ok &= (quad - closed).abs() <= 1e-6;
        ok &= (mc - quad).abs() <= 4.0 * se;
        bits.push(format!("{name} mc {mc:.5} vs {quad:.5} (se {se:.1e})"));
    }
    let mix = ValuationDistribution::exp_mixture(0.5, 1.0, 10.0).unwrap();
    let quad = cov_psi_h(&mix, &Transform::Identity).unwrap();
    let (mc, se) = sample_cov(&mix);
    ok &= quad > 0.0 && mc - 4.0 * se > 0.0 && (mc - quad).abs() <= 4.0 * se;
    bits.push(format!("mixture mc {mc:.5} vs {quad:.5} > 0"));
    (ok, bits.join("; "))
}

/// Criterion 2: the closed-form truncated mean E[S_X 1{S_Y >= alpha}] for
/// joint-normal sums matches brute-force bivariate sampling in five
/// regimes, including a zero threshold (where the value is sqrt(n) times
/// sigma/sqrt(2 pi)) and zero cross-covariance.
fn truncated_mean_oracle() -> (bool, String) {
    const DRAWS: u64 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let settings: [(f64, f64, usize, f64); 5] = [
        (1.0, 1.0, 400, 0.0),
        (0.5, 1.0, 400, 10.0),
        (1.5, 2.0, 900, -30.0),
        (0.0, 1.0, 400, 5.0),
        (1.0, 1.0, 10_000, 50.0),
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    for (sigma_xy, sigma_y, n, alpha) in settings {
        let closed = normal_truncated_mean(sigma_xy, sigma_y, n, alpha).unwrap();
        let root_n = (n as f64).sqrt();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..DRAWS {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let s_y = root_n * sigma_y * z1;
            // Any residual variance works: it is independent of the
            // indicator, so only the regression part carries the mean.
            let s_x = (sigma_xy / (sigma_y * sigma_y)) * s_y + root_n * z2;
            let x = if s_y >= alpha { s_x } else { 0.0 };
            sum += x;
            sumsq += x * x;
        }
        let mc = sum / DRAWS as f64;
        let var = (sumsq / DRAWS as f64 - mc * mc).max(0.0);
        let se = (var / DRAWS as f64).sqrt();
        let gap = (mc - closed).abs();
        ok &= gap <= 4.0 * se;
        worst = worst.max(if se > 0.0 { gap / se } else { 0.0 });
        if alpha == 0.0 {
            // Zero threshold keeps half the mass: sqrt(n) sigma phi(0).
            let trivial = root_n * sigma_xy / sigma_y / (2.0 * std::f64::consts::PI).sqrt();
            ok &= (closed - trivial).abs() <= 1e-12;
        }
    }
    (ok, format!("5 settings, worst |mc - closed| = {worst:.2} se"))
}

struct WelfareRow {
    n: usize,
    cost: f64,
    report: ExAnteReport,
    regret_bound: f64,
}

/// Shared simulation for criteria 3 and 4: uniform valuations, identity
/// statistic, cost 2 n^0.4, adjustment -sqrt(n) (ln n)^0.25, one million
/// replications per population size.
fn welfare_fixture() -> Vec<WelfareRow> {
    const REPLICATIONS: u64 = 1_000_000;
    let dist = Arc::new(uniform01());
    let constants = Constants::default();
    [1000usize, 4000, 16000]
        .into_iter()
        .map(|n| {
            let nf = n as f64;
            let alpha = -nf.sqrt() * nf.ln().powf(0.25);
            let cost = 2.0 * nf.powf(0.4);
            let rule =
                DecisionRule::adjusted_iid(&dist, Transform::Identity, n, alpha).unwrap();
            let mech = Mechanism::new(rule, cost).unwrap();
            let dists = vec![dist.clone(); n];
            let plan = RngPlan::new(42);
            let report =
                estimate_exante(&mech, &dists, REPLICATIONS, &plan, Some(1)).unwrap();
            let bundle = compute_moments_iid(&dist, &Transform::Identity, n).unwrap();
            let regret_bound = regret_upper_bound(&bundle, alpha, cost, &constants).unwrap();
            WelfareRow { n, cost, report, regret_bound }
        })
        .collect()
}

/// Criterion 3: the expected budget should have a positive 99% lower
/// confidence bound at every n and grow at a square-root-like rate.
fn budget_positivity(rows: &[WelfareRow]) -> (bool, String) {
    let lowers: Vec<f64> = rows.iter().map(|r| r.report.budget.ci99_lower()).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.report.budget.mean).collect();
    let costs: Vec<f64> = rows.iter().map(|r| r.cost).collect();
    let all_positive = lowers.iter().all(|&lo| lo > 0.0);
    // The literal slope check needs positive budgets; it cannot hold when
    // they are not.
    let slope_ok = fit_loglog_slope(
        &rows.iter().map(|r| (r.n as f64, r.report.budget.mean)).collect::<Vec<_>>(),
    )
    .map(|s| (0.35..=0.65).contains(&s))
    .unwrap_or(false);
    // Diagnostic: the deficit magnitude does follow the cost schedule.
    let mag_slope = fit_loglog_slope(
        &rows.iter().map(|r| (r.n as f64, r.report.budget.mean.abs())).collect::<Vec<_>>(),
    )
    .map(|s| format!("{s:.3}"))
    .unwrap_or_else(|_| "n/a".to_string());
    let ok = all_positive && slope_ok;
    let detail = format!(
        "budget ci99 lower {} not > 0; E[B] {} tracks -cost {} (revenue of the deeply \
         adjusted rule is near zero, so the deficit equals the cost schedule; |E[B]| \
         log-log slope {mag_slope})",
        join(&lowers, 2),
        join(&means, 2),
        join(&costs, 2),
    );
    (ok, detail)
}

/// Criterion 4: regret-ratio magnitudes fall strictly across the grid,
/// end below 0.05, and every estimate sits under its closed-form bound.
fn regret_convergence(rows: &[WelfareRow]) -> (bool, String) {
    let regrets: Vec<f64> = rows.iter().map(|r| r.report.regret_ratio.mean).collect();
    let mags: Vec<f64> = regrets.iter().map(|r| r.abs()).collect();
    let bounds: Vec<f64> = rows.iter().map(|r| r.regret_bound).collect();
    let mut ok = mags.windows(2).all(|w| w[1] < w[0]);
    ok &= *mags.last().unwrap() < 0.05;
    for (row, &mag) in rows.iter().zip(&mags) {
        // Checking the magnitude also covers the signed estimate.
        ok &= mag <= row.regret_bound + 4.0 * row.report.regret_ratio.se;
    }
    let detail = format!(
        "|regret| {} strictly falling, final < 0.05, bounds {}",
        join(&mags, 4),
        join(&bounds, 4),
    );
    (ok, detail)
}

/// Criterion 5: expected revenue of the zero-threshold virtual rule grows
/// like sqrt(n), and against a cost schedule n^0.7 the implied provision
/// ceiling revenue/cost shrinks along the grid.
fn revenue_ceiling() -> (bool, String) {
    const REPLICATIONS: u64 = 100_000;
    let dist = Arc::new(uniform01());
    let h = Transform::Virtual(dist.clone());
    let plan = RngPlan::new(55);
    let mut revenue = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let cmp = compare_profit(&dist, &h, n, 0.0, REPLICATIONS, &plan, Some(1)).unwrap();
        revenue.push((n as f64, cmp.profit_psi.mean));
    }
    let slope = fit_loglog_slope(&revenue).unwrap();
    let mut ok = (0.45..=0.55).contains(&slope);
    let ratios: Vec<f64> = revenue.iter().map(|&(n, rev)| rev / n.powf(0.7)).collect();
    ok &= ratios.windows(2).all(|w| w[1] < w[0]);
    let detail = format!(
        "revenue slope {slope:.3} in [0.45, 0.55]; ceiling/cost {} strictly falling",
        join(&ratios, 4),
    );
    (ok, detail)
}

/// Criterion 6: the efficient rule with pivotal transfers runs a deficit
/// close to the full cost once the cost scales linearly with n.
fn pivot_deficit() -> (bool, String) {
    const N: usize = 4000;
    const REPLICATIONS: u64 = 20_000;
    let cost = 0.4 * N as f64;
    let dist = Arc::new(uniform01());
    let mech = Mechanism::new(DecisionRule::efficient(N, cost).unwrap(), cost).unwrap();
    let dists = vec![dist; N];
    let plan = RngPlan::new(66);
    let report = estimate_exante(&mech, &dists, REPLICATIONS, &plan, Some(1)).unwrap();
    let floor = -0.3 * N as f64;
    let ok = report.budget.mean < floor;
    let detail = format!(
        "E[B] {:.1} < {floor:.0} at n {N} (provision prob {:.4})",
        report.budget.mean, report.provision.mean,
    );
    (ok, detail)
}

/// Criterion 7: the pro-rata rebate balances the realized budget to an
/// exact zero on every replication, its deviation gains stay below the
/// closed-form slack, and truthful interim utility is nonnegative at a
/// population size where the per-agent cost share is small.
fn balanced_rebate_incentives() -> (bool, String) {
    let dist = Arc::new(uniform01());
    let constants = Constants::default();
    let schedules = |n: usize| {
        let nf = n as f64;
        (-nf.sqrt() * nf.ln().powf(0.25), 2.0 * nf.powf(0.4))
    };
    let balanced = |n: usize| -> Mechanism {
        let (alpha, cost) = schedules(n);
        let rule = DecisionRule::adjusted_iid(&dist, Transform::Identity, n, alpha).unwrap();
        Mechanism::new(rule, cost)
            .unwrap()
            .with_scheme(TransferScheme::ProRataRebate)
            .unwrap()
    };
    let mut ok = true;

    // Exact balance: the estimator records when every replication was 0.0.
    let n0 = 500usize;
    let report = estimate_exante(
        &balanced(n0),
        &vec![dist.clone(); n0],
        20_000,
        &RngPlan::new(77),
        Some(1),
    )
    .unwrap();
    ok &= report.budget.exact_zero && report.budget.mean == 0.0;

    // Deviation gains against the closed-form slack at n = 1000.
    let n1 = 1000usize;
    let (alpha1, cost1) = schedules(n1);
    let probe = probe_incentives(
        &balanced(n1),
        &vec![dist.clone(); n1],
        0,
        &[0.25, 0.5, 0.75],
        &[0.2, 0.5, 0.8],
        20_000,
        &RngPlan::new(78),
        Some(1),
    )
    .unwrap();
    let bundle = compute_moments_iid(&dist, &Transform::Identity, n1 - 1).unwrap();
    let slack = gamma_bound(&bundle, alpha1, cost1, 1.0, 1.0, &constants).unwrap();
    ok &= probe.gamma_hat <= slack + 4.0 * probe.gamma_se;

    // Interim participation at n = 4000, where the cost share per agent
    // (~0.014) sits below the lowest probed valuation.
    let n2 = 4000usize;
    let probe2 = probe_incentives(
        &balanced(n2),
        &vec![dist.clone(); n2],
        0,
        &[0.1, 0.3, 0.5, 0.7, 0.9],
        &[0.5],
        10_000,
        &RngPlan::new(79),
        Some(1),
    )
    .unwrap();
    let (worst_value, worst) = probe2.worst_interim();
    ok &= worst.mean >= -4.0 * worst.se;

    let detail = format!(
        "budget exactly 0 on all replications; gain {:.4} <= slack {:.4}; worst interim \
         {:.4} at value {:.2} (se {:.1e})",
        probe.gamma_hat, slack, worst.mean, worst_value, worst.se,
    );
    (ok, detail)
}

/// Criterion 8: the probability that realized welfare plus budget misses
/// the first-best welfare stays under the exponential tail bound.
fn accounting_tails() -> (bool, String) {
    const REPLICATIONS: u64 = 100_000;
    let dist = Arc::new(uniform01());
    let mut ok = true;
    let mut bits = Vec::new();
    for n in [400usize, 1600] {
        let nf = n as f64;
        let alpha = -nf.sqrt() * nf.ln().powf(0.25);
        let cost = 2.0 * nf.powf(0.4);
        let rule = DecisionRule::adjusted_iid(&dist, Transform::Identity, n, alpha).unwrap();
        let mech = Mechanism::new(rule, cost).unwrap();
        let tails = estimate_ex_post_tails(
            &mech,
            &vec![dist.clone(); n],
            0.5,
            REPLICATIONS,
            &RngPlan::new(88),
            Some(1),
        )
        .unwrap();
        let bound = hoeffding_ex_post(n, alpha, cost, 0.5, 1.0, 1.0, 0.5)
            .unwrap()
            .identity_mismatch;
        let p = tails.identity_mismatch;
        ok &= p.mean <= bound + 4.0 * p.se;
        bits.push(format!("n {n}: P {:.1e} <= bound {bound:.2e}", p.mean));
    }
    (ok, bits.join("; "))
}

/// Criterion 9: under a decreasing hazard rate the identity statistic
/// earns at least the closed-form fraction of the optimal profit, with
/// the fraction's mean and variance taken from quadrature.
fn hazard_profit_floor() -> (bool, String) {
    const N: usize = 10_000;
    const REPLICATIONS: u64 = 50_000;
    let dist = Arc::new(ValuationDistribution::weibull(0.7, 1.0).unwrap());
    let cost = (N as f64).powf(0.3);
    let mean = dist.mean().unwrap();
    let second = transform_mean(&dist, &Transform::power(2.0).unwrap()).unwrap();
    let floor = dhr_profit_bound(mean, second - mean * mean).unwrap();
    let cmp = compare_profit(
        &dist,
        &Transform::Identity,
        N,
        cost,
        REPLICATIONS,
        &RngPlan::new(99),
        Some(1),
    )
    .unwrap();
    let ok = cmp.ratio >= floor - 4.0 * cmp.ratio_se;
    let detail = format!(
        "profit ratio {:.4} >= floor {floor:.4} - 4 se ({:.1e})",
        cmp.ratio, cmp.ratio_se,
    );
    (ok, detail)
}

/// Criterion 10: rerunning one config under different worker counts gives
/// byte-identical CSV output.
fn cli_determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "kind": "welfare-convergence",
            "distribution": {"family": "uniform", "lo": 0.0, "hi": 1.0},
            "n-grid": [200, 400],
            "replications": 2000,
            "seed": 9
        }"#,
    )
    .unwrap();
    let csv_for = |workers: &str, sub: &str| -> String {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_amt"))
            .args([
                "report",
                "--config",
                cfg.to_str().unwrap(),
                "--workers",
                workers,
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(status.status.success(), "run with {workers} workers failed");
        std::fs::read_to_string(out.join("results.csv")).unwrap()
    };
    let one = csv_for("1", "w1");
    let eight = csv_for("8", "w8");
    let ok = one == eight && one.lines().count() == 3;
    (ok, format!("1-worker and 8-worker CSVs identical ({} bytes)", one.len()))
}
