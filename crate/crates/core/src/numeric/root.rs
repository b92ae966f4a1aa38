//! Bracketed bisection for monotone functions.

/// Solve `f(x) = target` for nondecreasing `f` on `[lo, hi]`.
///
/// Requires `f(lo) <= target <= f(hi)` up to roundoff; returns the midpoint
/// of the final bracket. Tolerance is absolute, scaled by the caller.
pub fn bisect_increasing<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
    max_iter: u32,
) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket exhausted at floating resolution
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve `f(x) = target` for nondecreasing differentiable `f` on `[lo, hi]`.
///
/// Newton steps are confined to a shrinking bracket, with a midpoint
/// fallback whenever the derivative degenerates or a step escapes. The
/// bracket update inherits bisection's termination guarantee while the
/// Newton polish reaches machine precision in a handful of evaluations,
/// which matters when the result feeds a quadrature: a root resolved only
/// to a coarse absolute tolerance shows up there as integrand noise.
pub fn newton_increasing<F, D>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    max_iter: u32,
) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let fx = f(x);
        if fx == target {
            return x;
        }
        if fx < target {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = if d > 0.0 { x - (fx - target) / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x || next <= lo || next >= hi {
            break; // bracket exhausted at floating resolution
        }
        x = next;
    }
    x
}
