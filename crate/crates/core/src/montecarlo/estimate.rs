/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub replications: u64,
    /// Every replication produced exactly `0.0`, as happens for quantities
    /// that vanish identically (for example the rebated ex post budget).
    pub exact_zero: bool,
}

impl Estimate {
    /// Lower endpoint of the two-sided 99% normal confidence interval.
    pub fn ci99_lower(&self) -> f64 {
        self.mean - 2.575_829_303_548_900_4 * self.se
    }

    /// Upper endpoint of the two-sided 99% normal confidence interval.
    pub fn ci99_upper(&self) -> f64 {
        self.mean + 2.575_829_303_548_900_4 * self.se
    }
}

/// Streaming sum / sum-of-squares accumulator. Merging is commutative, but
/// the engine still merges in a fixed batch order so that floating-point
/// results never depend on scheduling.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MeanAcc {
    sum: f64,
    sumsq: f64,
    all_zero: bool,
}

impl MeanAcc {
    pub const fn new() -> Self {
        MeanAcc {
            sum: 0.0,
            sumsq: 0.0,
            all_zero: true,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sumsq += x * x;
        if x != 0.0 {
            self.all_zero = false;
        }
    }

    pub fn merge(&mut self, other: &MeanAcc) {
        self.sum += other.sum;
        self.sumsq += other.sumsq;
        self.all_zero &= other.all_zero;
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self, r: u64) -> f64 {
        self.sum / r as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self, r: u64) -> f64 {
        if r < 2 {
            return f64::NAN;
        }
        let rf = r as f64;
        ((self.sumsq - self.sum * self.sum / rf) / (rf - 1.0)).max(0.0)
    }

    pub fn estimate(&self, r: u64) -> Estimate {
        let se = if r >= 2 {
            (self.variance(r) / r as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            mean: self.mean(r),
            se,
            replications: r,
            exact_zero: self.all_zero,
        }
    }
}

/// Cross-product accumulator for a covariance between two tracked series.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CrossAcc {
    sum_xy: f64,
}

impl CrossAcc {
    pub const fn new() -> Self {
        CrossAcc { sum_xy: 0.0 }
    }

    #[inline]
    pub fn push(&mut self, x: f64, y: f64) {
        self.sum_xy += x * y;
    }

    pub fn merge(&mut self, other: &CrossAcc) {
        self.sum_xy += other.sum_xy;
    }

    /// Unbiased sample covariance given the marginal accumulators.
    pub fn covariance(&self, x: &MeanAcc, y: &MeanAcc, r: u64) -> f64 {
        if r < 2 {
            return f64::NAN;
        }
        let rf = r as f64;
        (self.sum_xy - x.sum() * y.sum() / rf) / (rf - 1.0)
    }
}

/// Delta-method standard error of the ratio of two sample means with
/// per-replication variances `var_a`, `var_b` and covariance `cov`.
pub(crate) fn delta_ratio_se(
    mean_a: f64,
    var_a: f64,
    mean_b: f64,
    var_b: f64,
    cov: f64,
    r: u64,
) -> f64 {
    if mean_b == 0.0 {
        return f64::NAN;
    }
    let ratio = mean_a / mean_b;
    let var = (var_a - 2.0 * ratio * cov + ratio * ratio * var_b) / (mean_b * mean_b);
    (var.max(0.0) / r as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_matches_direct_formulas() {
        let xs = [1.0, 2.0, 4.0, 8.5];
        let mut acc = MeanAcc::new();
        for x in xs {
            acc.push(x);
        }
        let est = acc.estimate(xs.len() as u64);
        let mean = xs.iter().sum::<f64>() / 4.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        approx::assert_relative_eq!(est.mean, mean, epsilon = 1e-12);
        approx::assert_relative_eq!(est.se, (var / 4.0).sqrt(), epsilon = 1e-12);
        assert!(!est.exact_zero);
        assert_eq!(est.replications, 4);
    }

    #[test]
    fn exact_zero_flag_tracks_contents() {
        let mut acc = MeanAcc::new();
        acc.push(0.0);
        acc.push(0.0);
        assert!(acc.estimate(2).exact_zero);
        acc.push(1e-300);
        assert!(!acc.estimate(3).exact_zero);
    }

    #[test]
    fn merge_combines_partial_accumulators() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut whole = MeanAcc::new();
        for x in &xs {
            whole.push(*x);
        }
        let mut left = MeanAcc::new();
        let mut right = MeanAcc::new();
        for x in &xs[..37] {
            left.push(*x);
        }
        for x in &xs[37..] {
            right.push(*x);
        }
        left.merge(&right);
        // Distinct summation trees agree to rounding; bitwise determinism
        // holds for a fixed batch layout and is checked at the engine level.
        approx::assert_relative_eq!(left.sum(), whole.sum(), max_relative = 1e-12);
        approx::assert_relative_eq!(left.variance(100), whole.variance(100), max_relative = 1e-10);
        // Merging an empty accumulator changes nothing, bit for bit.
        let mut with_empty = whole;
        with_empty.merge(&MeanAcc::new());
        assert_eq!(with_empty.sum(), whole.sum());
        assert_eq!(with_empty.variance(100), whole.variance(100));
    }

    #[test]
    fn covariance_matches_direct() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.5, 1.0, 4.0, 3.5];
        let mut mx = MeanAcc::new();
        let mut my = MeanAcc::new();
        let mut cr = CrossAcc::new();
        for (x, y) in xs.iter().zip(&ys) {
            mx.push(*x);
            my.push(*y);
            cr.push(*x, *y);
        }
        let r = xs.len() as u64;
        let mean_x = 2.5;
        let mean_y = 2.5;
        let direct: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum::<f64>()
            / 3.0;
        approx::assert_relative_eq!(cr.covariance(&mx, &my, r), direct, epsilon = 1e-12);
    }

    #[test]
    fn ci99_brackets_the_mean() {
        let est = Estimate {
            mean: 2.0,
            se: 0.1,
            replications: 100,
            exact_zero: false,
        };
        assert!(est.ci99_lower() < 2.0 && 2.0 < est.ci99_upper());
        approx::assert_abs_diff_eq!(est.ci99_upper() - est.ci99_lower(), 2.0 * 2.5758293035489004 * 0.1, epsilon = 1e-12);
    }
}
