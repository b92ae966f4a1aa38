use super::MechError;
use crate::distributions::{transform_mean, Transform, ValuationDistribution};
use std::sync::Arc;

/// How the provision cutoff for the summed statistic is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Provide when `sum_i h_i(v_i) >= sum_i mu_{h,i} + alpha`.
    MeanAdjusted { alpha: f64 },
    /// Provide when `sum_i h_i(v_i) >= value`.
    Absolute { value: f64 },
}

/// A thresholded decision rule on per-agent transformed valuations.
///
/// Provision is `1{ sum_i h_i(v_i) >= tau }` where `tau` is cached at
/// construction. Each `h_i` must be nondecreasing so that pivotal values
/// are well defined; the [`Transform`] variants guarantee this.
#[derive(Debug, Clone)]
pub struct DecisionRule {
    transforms: Vec<Transform>,
    threshold: Threshold,
    mu_h: Vec<f64>,
    threshold_value: f64,
}

impl DecisionRule {
    /// Mean-adjusted rule from precomputed transform means.
    pub fn mean_adjusted(
        transforms: Vec<Transform>,
        mu_h: Vec<f64>,
        alpha: f64,
    ) -> Result<Self, MechError> {
        if transforms.is_empty() {
            return Err(MechError::InvalidParameter("need at least one agent".into()));
        }
        if transforms.len() != mu_h.len() {
            return Err(MechError::LengthMismatch {
                expected: transforms.len(),
                got: mu_h.len(),
            });
        }
        if !alpha.is_finite() {
            return Err(MechError::InvalidParameter("adjustment must be finite".into()));
        }
        if let Some(bad) = mu_h.iter().find(|m| !m.is_finite()) {
            return Err(MechError::InvalidParameter(format!(
                "transform mean {bad} must be finite"
            )));
        }
        let threshold_value = mu_h.iter().sum::<f64>() + alpha;
        Ok(DecisionRule {
            transforms,
            threshold: Threshold::MeanAdjusted { alpha },
            mu_h,
            threshold_value,
        })
    }

    /// Mean-adjusted rule with means computed from the agents' distributions.
    pub fn adjusted(
        dists: &[Arc<ValuationDistribution>],
        transforms: Vec<Transform>,
        alpha: f64,
    ) -> Result<Self, MechError> {
        if dists.len() != transforms.len() {
            return Err(MechError::LengthMismatch {
                expected: dists.len(),
                got: transforms.len(),
            });
        }
        let mu_h = dists
            .iter()
            .zip(&transforms)
            .map(|(d, h)| transform_mean(d, h))
            .collect::<Result<Vec<_>, _>>()?;
        Self::mean_adjusted(transforms, mu_h, alpha)
    }

    /// Symmetric mean-adjusted rule for `n` agents sharing one distribution.
    pub fn adjusted_iid(
        dist: &Arc<ValuationDistribution>,
        transform: Transform,
        n: usize,
        alpha: f64,
    ) -> Result<Self, MechError> {
        if n == 0 {
            return Err(MechError::InvalidParameter("need at least one agent".into()));
        }
        let mu = transform_mean(dist, &transform)?;
        Self::mean_adjusted(vec![transform; n], vec![mu; n], alpha)
    }

    /// Rule with a fixed absolute cutoff on the summed statistic.
    pub fn absolute(transforms: Vec<Transform>, value: f64) -> Result<Self, MechError> {
        if transforms.is_empty() {
            return Err(MechError::InvalidParameter("need at least one agent".into()));
        }
        if !value.is_finite() {
            return Err(MechError::InvalidParameter("threshold must be finite".into()));
        }
        let n = transforms.len();
        Ok(DecisionRule {
            transforms,
            threshold: Threshold::Absolute { value },
            mu_h: vec![0.0; n],
            threshold_value: value,
        })
    }

    /// First-best benchmark: provide when total valuation covers the cost.
    pub fn efficient(n: usize, cost: f64) -> Result<Self, MechError> {
        if n == 0 {
            return Err(MechError::InvalidParameter("need at least one agent".into()));
        }
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(MechError::InvalidParameter("cost must be finite and nonnegative".into()));
        }
        Self::absolute(vec![Transform::Identity; n], cost)
    }

    /// Profit-oriented rule: the centered statistic `sum_i (h_i - mu_{h,i})`
    /// must cover the cost, i.e. a mean-adjusted rule with `alpha = cost`.
    pub fn profit(
        dists: &[Arc<ValuationDistribution>],
        transforms: Vec<Transform>,
        cost: f64,
    ) -> Result<Self, MechError> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(MechError::InvalidParameter("cost must be finite and nonnegative".into()));
        }
        Self::adjusted(dists, transforms, cost)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.transforms.len()
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    /// The cached cutoff `tau` for the summed statistic.
    #[inline]
    pub fn threshold_value(&self) -> f64 {
        self.threshold_value
    }

    /// The adjustment over the summed means, if this is a mean-adjusted rule.
    pub fn alpha(&self) -> Option<f64> {
        match self.threshold {
            Threshold::MeanAdjusted { alpha } => Some(alpha),
            Threshold::Absolute { .. } => None,
        }
    }

    pub fn transform(&self, i: usize) -> &Transform {
        &self.transforms[i]
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    pub fn transform_means(&self) -> &[f64] {
        &self.mu_h
    }

    /// `sum_i h_i(v_i)` for a full profile.
    pub fn score(&self, values: &[f64]) -> Result<f64, MechError> {
        self.check_len(values)?;
        let mut total = 0.0;
        for (h, v) in self.transforms.iter().zip(values) {
            total += h.eval(*v)?;
        }
        Ok(total)
    }

    /// Score plus the per-agent transformed values, written into `out`.
    pub(crate) fn score_into(&self, values: &[f64], out: &mut Vec<f64>) -> Result<f64, MechError> {
        self.check_len(values)?;
        out.clear();
        let mut total = 0.0;
        for (h, v) in self.transforms.iter().zip(values) {
            let hv = h.eval(*v)?;
            out.push(hv);
            total += hv;
        }
        Ok(total)
    }

    pub fn decide(&self, values: &[f64]) -> Result<bool, MechError> {
        Ok(self.score(values)? >= self.threshold_value)
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<(), MechError> {
        if values.len() != self.transforms.len() {
            return Err(MechError::LengthMismatch {
                expected: self.transforms.len(),
                got: values.len(),
            });
        }
        Ok(())
    }
}

/// The pivotal valuation for agent `i`: the infimum report that still
/// triggers provision holding the others fixed.
///
/// Returns `+inf` when no finite report reaches the threshold; with a cap
/// `b_i` the charged transfer is `min(pivot, b_i)`, so callers clamp. The
/// result is never negative.
pub fn pivotal_value(rule: &DecisionRule, i: usize, values: &[f64]) -> Result<f64, MechError> {
    rule.check_len(values)?;
    if i >= values.len() {
        return Err(MechError::InvalidProfile(format!(
            "agent index {i} out of range for {} agents",
            values.len()
        )));
    }
    let mut rest = 0.0;
    for (j, (h, v)) in rule.transforms.iter().zip(values).enumerate() {
        if j != i {
            rest += h.eval(*v)?;
        }
    }
    let needed = rule.threshold_value - rest;
    let h = rule.transform(i);
    // When the agent's own report already clears the threshold it brackets
    // the pivot from above, which lets the numeric inverse skip bracketing.
    let hint = match h.eval(values[i]) {
        Ok(own) if rest + own >= rule.threshold_value => Some(values[i]),
        _ => None,
    };
    let pivot = h.inverse_at_least(needed, hint)?;
    Ok(pivot.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Transform;

    fn uniform01() -> Arc<ValuationDistribution> {
        Arc::new(ValuationDistribution::uniform(0.0, 1.0).unwrap())
    }

    #[test]
    fn mean_adjusted_decides_against_cached_cutoff() {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity, Transform::Identity],
            vec![0.5, 0.5],
            -0.3,
        )
        .unwrap();
        assert_eq!(rule.threshold_value(), 0.7);
        assert_eq!(rule.alpha(), Some(-0.3));
        assert!(rule.decide(&[0.5, 0.4]).unwrap());
        assert!(rule.decide(&[0.35, 0.35]).unwrap());
        assert!(!rule.decide(&[0.2, 0.1]).unwrap());
    }

    #[test]
    fn adjusted_iid_matches_manual_means() {
        let d = uniform01();
        let rule = DecisionRule::adjusted_iid(&d, Transform::Identity, 3, 0.2).unwrap();
        approx::assert_relative_eq!(rule.threshold_value(), 1.7, epsilon = 1e-12);
        for m in rule.transform_means() {
            approx::assert_relative_eq!(*m, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn boundary_score_provides() {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity, Transform::Identity],
            vec![0.5, 0.5],
            -0.3,
        )
        .unwrap();
        assert!(rule.decide(&[0.7, 0.0]).unwrap());
        assert!(rule.decide(&[0.0, 0.7]).unwrap());
    }

    #[test]
    fn efficient_rule_is_total_value_versus_cost() {
        let rule = DecisionRule::efficient(3, 1.2).unwrap();
        assert!(rule.decide(&[0.5, 0.5, 0.2]).unwrap());
        assert!(!rule.decide(&[0.5, 0.5, 0.1]).unwrap());
    }

    #[test]
    fn profit_rule_threshold_centers_the_statistic() {
        let d = uniform01();
        let dists = vec![d.clone(), d.clone()];
        let hs = vec![
            Transform::Virtual(d.clone()),
            Transform::Virtual(d.clone()),
        ];
        let rule = DecisionRule::profit(&dists, hs, 1.0).unwrap();
        // Virtual valuations have mean zero, so the cutoff equals the cost.
        approx::assert_abs_diff_eq!(rule.threshold_value(), 1.0, epsilon = 1e-9);
        // 2v - 1 at v = 0.8 gives 0.6 each; the sum 1.2 clears the cutoff.
        assert!(rule.decide(&[0.8, 0.8]).unwrap());
        assert!(!rule.decide(&[0.7, 0.7]).unwrap());
    }

    #[test]
    fn score_checks_length() {
        let rule = DecisionRule::efficient(2, 0.5).unwrap();
        assert!(matches!(
            rule.score(&[0.1]),
            Err(MechError::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn pivotal_matches_hand_computation() {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity, Transform::Identity],
            vec![0.5, 0.5],
            -0.3,
        )
        .unwrap();
        // tau = 0.7; against v_2 = 0.4 agent 1 must report at least 0.3.
        let p = pivotal_value(&rule, 0, &[0.5, 0.4]).unwrap();
        approx::assert_abs_diff_eq!(p, 0.3, epsilon = 1e-12);
        let p2 = pivotal_value(&rule, 1, &[0.5, 0.4]).unwrap();
        approx::assert_abs_diff_eq!(p2, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn pivotal_clamps_at_zero_when_others_suffice() {
        let rule = DecisionRule::mean_adjusted(
            vec![Transform::Identity, Transform::Identity],
            vec![0.5, 0.5],
            -0.9,
        )
        .unwrap();
        // tau = 0.1 is covered by agent 2 alone, so agent 1 pivots at zero.
        let p = pivotal_value(&rule, 0, &[0.5, 0.4]).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn pivotal_is_infinite_when_unreachable() {
        let d = uniform01();
        let hs = vec![
            Transform::Virtual(d.clone()),
            Transform::Virtual(d.clone()),
        ];
        let rule = DecisionRule::mean_adjusted(hs, vec![0.0, 0.0], 1.8).unwrap();
        // Virtual valuations on [0, 1] top out at 1, so 1.8 - 1 = 0.8 is
        // reachable but 1.8 - 0 would not be; check the unreachable case.
        let p = pivotal_value(&rule, 0, &[0.9, 0.1]).unwrap();
        assert!(p.is_infinite());
    }

    #[test]
    fn pivotal_with_virtual_transform_inverts_closed_form() {
        let d = uniform01();
        let hs = vec![
            Transform::Virtual(d.clone()),
            Transform::Virtual(d.clone()),
        ];
        let rule = DecisionRule::mean_adjusted(hs, vec![0.0, 0.0], 0.5).unwrap();
        // Needs psi(v) >= 0.5 - psi(0.9) = 0.5 - 0.8 = -0.3, so v = 0.35.
        let p = pivotal_value(&rule, 1, &[0.9, 0.6]).unwrap();
        approx::assert_abs_diff_eq!(p, 0.35, epsilon = 1e-9);
    }

    #[test]
    fn invalid_constructions_are_rejected() {
        assert!(DecisionRule::mean_adjusted(vec![], vec![], 0.0).is_err());
        assert!(DecisionRule::mean_adjusted(
            vec![Transform::Identity],
            vec![0.5, 0.5],
            0.0
        )
        .is_err());
        assert!(DecisionRule::mean_adjusted(
            vec![Transform::Identity],
            vec![f64::NAN],
            0.0
        )
        .is_err());
        assert!(DecisionRule::absolute(vec![Transform::Identity], f64::INFINITY).is_err());
        assert!(DecisionRule::efficient(2, -1.0).is_err());
        assert!(DecisionRule::efficient(0, 1.0).is_err());
    }
}
