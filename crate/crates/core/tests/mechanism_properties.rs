//! Randomized structural checks on decision rules and transfer schemes:
//! monotonicity, dominant-strategy incentives, participation, and exact
//! budget accounting.

use amt_core::mechanisms::{
    DecisionRule, Mechanism, Profile, TransferScheme, ZeroConditional,
};
use amt_core::distributions::Transform;
use proptest::prelude::*;
use std::sync::Arc;

fn transform_strategy() -> impl Strategy<Value = Transform> {
    prop_oneof![
        Just(Transform::Identity),
        (0.6..2.0f64).prop_map(|e| Transform::power(e).unwrap()),
        (0.5..2.0f64, 0.0..1.0f64).prop_map(|(a, b)| Transform::affine(a, b).unwrap()),
    ]
}

fn rule_strategy() -> impl Strategy<Value = DecisionRule> {
    (
        proptest::collection::vec((transform_strategy(), 0.0..1.0f64), 1..7),
        -2.0..2.0f64,
    )
        .prop_map(|(agents, alpha)| {
            let (hs, mus): (Vec<_>, Vec<_>) = agents.into_iter().unzip();
            DecisionRule::mean_adjusted(hs, mus, alpha).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    // Raising any single report never cancels provision.
    #[test]
    fn decisions_are_monotone_in_every_coordinate(
        rule in rule_strategy(),
        seed_values in proptest::collection::vec(0.0..10.0f64, 8),
        agent_pick in 0..8usize,
        bump in 0.01..5.0f64,
    ) {
        let n = rule.n();
        let values = &seed_values[..n];
        let agent = agent_pick % n;
        let before = rule.decide(values).unwrap();
        let mut raised = values.to_vec();
        raised[agent] += bump;
        let after = rule.decide(&raised).unwrap();
        prop_assert!(after >= before, "raising agent {agent} flipped provision off");
    }

    // Truth-telling is optimal against any fixed profile of other reports,
    // and participation never loses money, for the pivotal scheme.
    #[test]
    fn pivotal_transfers_are_strategyproof_and_participation_safe(
        n in 2..6usize,
        alpha in -1.0..1.0f64,
        cost in 0.0..0.5f64,
        profile_seed in proptest::collection::vec(0.0..1.0f64, 6),
        agent_pick in 0..6usize,
    ) {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity; n],
            vec![0.5; n],
            alpha,
        ).unwrap();
        let mech = Mechanism::new(rule, cost).unwrap();
        let values = &profile_seed[..n];
        let agent = agent_pick % n;
        let truth = values[agent];

        let truthful = mech.evaluate(&Profile::new(values.to_vec()).unwrap()).unwrap();
        let q_t = if truthful.provided { 1.0 } else { 0.0 };
        let u_truth = truth * q_t - truthful.transfers[agent];
        prop_assert!(u_truth >= -1e-9, "participation loss {u_truth}");

        for k in 0..21 {
            let report = k as f64 / 20.0;
            let mut misreported = values.to_vec();
            misreported[agent] = report;
            let out = mech.evaluate(&Profile::new(misreported).unwrap()).unwrap();
            let q_d = if out.provided { 1.0 } else { 0.0 };
            let u_dev = truth * q_d - out.transfers[agent];
            prop_assert!(
                u_truth >= u_dev - 1e-9,
                "misreport {report} gains {} over truthful {u_truth}",
                u_dev
            );
        }
    }

    // Welfare plus budget equals realized surplus times the decision, for
    // every transfer scheme.
    #[test]
    fn accounting_identity_holds_for_all_schemes(
        n_half in 1..3usize,
        alpha in -1.0..1.0f64,
        cost in 0.0..0.5f64,
        profile_seed in proptest::collection::vec(0.0..1.0f64, 6),
    ) {
        let n = 2 * n_half;
        let values = &profile_seed[..n];
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity; n],
            vec![0.5; n],
            alpha,
        ).unwrap();
        let schemes = [
            TransferScheme::Pivotal,
            TransferScheme::ProRataRebate,
            TransferScheme::PairedRebate(Arc::new(ZeroConditional)),
        ];
        for scheme in schemes {
            let mech = Mechanism::new(rule.clone(), cost).unwrap()
                .with_scheme(scheme)
                .unwrap();
            let out = mech.evaluate(&Profile::new(values.to_vec()).unwrap()).unwrap();
            let q = if out.provided { 1.0 } else { 0.0 };
            let surplus = (values.iter().sum::<f64>() - cost) * q;
            let scale = surplus.abs().max(1.0);
            prop_assert!(
                (out.welfare + out.budget - surplus).abs() <= 1e-9 * scale,
                "identity broke: W {} B {} surplus {surplus}",
                out.welfare,
                out.budget
            );
        }
    }

    // The first-best rule is the mean-adjusted rule whose adjustment shifts
    // the cutoff from the summed means to the cost.
    #[test]
    fn pivot_adjustment_reproduces_the_efficient_rule(
        n in 1..6usize,
        cost in 0.0..3.0f64,
        profile_seed in proptest::collection::vec(0.0..1.0f64, 6),
    ) {
        let values = &profile_seed[..n];
        let mus = vec![0.5; n];
        let alpha = cost - mus.iter().sum::<f64>();
        let pivot = DecisionRule::mean_adjusted(
            vec![Transform::Identity; n],
            mus,
            alpha,
        ).unwrap();
        let efficient = DecisionRule::efficient(n, cost).unwrap();
        prop_assert_eq!(
            pivot.decide(values).unwrap(),
            efficient.decide(values).unwrap()
        );
    }
}
