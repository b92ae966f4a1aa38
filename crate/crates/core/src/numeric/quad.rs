//! Adaptive Gauss-Kronrod quadrature (7-15 point pair).
//!
//! Intervals are bisected until the local Kronrod/Gauss discrepancy fits
//! within a proportional share of the error budget. Integrands are expected
//! to be finite on the open interval; endpoint singularities that remain
//! integrable are handled by the geometric refinement toward the endpoint.
//!
//! Total work is bounded: refinement stops at a depth cap, at interval
//! widths near roundoff, and at a global panel budget. An integrand the
//! rule cannot resolve (noise, unresolvable oscillation, a divergent
//! moment) therefore returns promptly with `converged == false` and a
//! large error estimate instead of subdividing without practical end.

/// Kronrod abscissae on [0, 1] side of the symmetric rule (last entry is 0).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], 0).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Result of one Kronrod panel: (integral, |kronrod - gauss|).
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative total error estimate.
    pub error: f64,
    /// True when every subinterval met its local tolerance.
    pub converged: bool,
}

/// Hard cap on panels per call. Convergent integrands, including ones
/// with integrable endpoint singularities, stay orders of magnitude below
/// it; only integrands the rule fundamentally cannot resolve reach it, and
/// for those exhaustive subdivision would run for hours before the depth
/// cap alone ended it.
const MAX_PANELS: u64 = 500_000;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The error budget is halved at each bisection so the leaf tolerances sum
/// to at most `tol`. Refinement stops at a depth where the interval width
/// reaches roundoff and at the global panel budget; such panels are
/// accepted and flagged through `error` and `converged`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true };
    }
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut converged = true;
    let mut panels: u64 = 0;
    // Work stack of (lo, hi, local budget, depth).
    let mut stack: Vec<(f64, f64, f64, u32)> = vec![(a, b, tol.max(1e-300), 0)];
    while let Some((lo, hi, budget, depth)) = stack.pop() {
        let (value, err) = kronrod_panel(&f, lo, hi);
        panels += 1;
        let width_floor = (hi - lo).abs() <= 1e-14 * (lo.abs() + hi.abs() + 1.0);
        if err <= budget || width_floor || depth >= 52 || panels >= MAX_PANELS {
            if panels >= MAX_PANELS {
                // Refinement cut short globally: the estimate is suspect
                // even where individual panel errors look small.
                converged = false;
            }
            if !(err <= budget) && !err.is_nan() {
                converged = converged && err <= budget.max(1e-12);
            }
            if value.is_nan() || err.is_nan() {
                return QuadResult { value: f64::NAN, error: f64::INFINITY, converged: false };
            }
            total += value;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * budget, depth + 1));
            stack.push((mid, hi, 0.5 * budget, depth + 1));
        }
    }
    QuadResult { value: total, error: err_total, converged }
}

/// Integrate with the unit-interval endpoints mapped to an unbounded upper
/// limit: `\int_lo^\infty f(v) dv` via `v = lo + t/(1-t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, lo: f64, tol: f64) -> QuadResult {
    integrate(
        move |t| {
            let om = 1.0 - t;
            if om <= 0.0 {
                return 0.0;
            }
            let v = lo + t / om;
            let jac = 1.0 / (om * om);
            let fv = f(v);
            if fv == 0.0 {
                0.0
            } else {
                fv * jac
            }
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-10);
        assert!(r.converged);
        assert_relative_eq!(r.value, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-10);
        // \int_0^pi sin(10x) dx = (1 - cos(10 pi)) / 10 = 0
        assert!(r.value.abs() < 1e-9);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // \int_0^1 1/sqrt(x) dx = 2, singular at 0.
        let r = integrate(|x| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, 1e-8);
        assert!((r.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn log_singularity_on_quantile_scale() {
        // \int_0^1 (-ln(1-u))^3 du = Gamma(4) = 6 (third moment of Exp(1)).
        let r = integrate(
            |u| {
                let x = -(-u).ln_1p();
                x * x * x
            },
            0.0,
            1.0,
            1e-9,
        );
        assert_relative_eq!(r.value, 6.0, max_relative = 1e-7);
    }

    #[test]
    fn unresolvable_oscillation_fails_fast() {
        // ~1e8 periods over the interval: no bisection depth the driver
        // allows can resolve this, so the panel budget must end the run
        // with an honest non-converged report instead of an hours-long
        // exhaustive subdivision.
        let r = integrate(|x| (1e9 * x).sin(), 0.0, 1.0, 1e-12);
        assert!(!r.converged);
        assert!(r.value.is_finite());
        assert!(r.error > 1e-6);
    }

    #[test]
    fn semi_infinite_exponential_tail() {
        // \int_0^infty e^{-v} dv = 1
        let r = integrate_semi_infinite(|v| (-v).exp(), 0.0, 1e-10);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-9);
        // \int_2^infty v e^{-v} dv = 3 e^{-2}
        let r = integrate_semi_infinite(|v| v * (-v).exp(), 2.0, 1e-10);
        assert_relative_eq!(r.value, 3.0 * (-2.0_f64).exp(), max_relative = 1e-9);
    }
}
