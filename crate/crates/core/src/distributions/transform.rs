//! Increasing continuous transforms applied to valuations inside the
//! decision statistic.

use super::{DistError, ValuationDistribution, BISECT_MAX_ITER, BISECT_TOL};
use crate::numeric::root;
use std::sync::Arc;

/// Transform `h` applied to a valuation before summing. All variants are
/// strictly increasing and continuous on the valuation support.
#[derive(Debug, Clone)]
pub enum Transform {
    Identity,
    /// `v^exponent` with a positive exponent.
    Power { exponent: f64 },
    /// `scale * v + shift` with positive scale.
    Affine { scale: f64, shift: f64 },
    /// The virtual valuation of the given distribution.
    Virtual(Arc<ValuationDistribution>),
}

impl Transform {
    pub fn power(exponent: f64) -> Result<Self, DistError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(DistError::InvalidParameter("power exponent must be positive".into()));
        }
        Ok(Transform::Power { exponent })
    }

    pub fn affine(scale: f64, shift: f64) -> Result<Self, DistError> {
        if !(scale.is_finite() && scale > 0.0 && shift.is_finite()) {
            return Err(DistError::InvalidParameter("affine scale must be positive".into()));
        }
        Ok(Transform::Affine { scale, shift })
    }

    #[inline]
    pub fn eval(&self, v: f64) -> Result<f64, DistError> {
        match self {
            Transform::Identity => Ok(v),
            Transform::Power { exponent } => Ok(v.powf(*exponent)),
            Transform::Affine { scale, shift } => Ok(scale * v + shift),
            Transform::Virtual(dist) => dist.virtual_valuation(v),
        }
    }

    /// Smallest `v >= 0` with `h(v) >= y`, or infinity when unattainable.
    ///
    /// `hint` is an upper bracket known to satisfy `h(hint) >= y` (the hot
    /// path passes the agent's realised valuation when the good is
    /// provided). Virtual transforms of uniform and exponential laws invert
    /// in closed form; other virtual transforms bisect over the support and
    /// therefore require a Myerson-regular distribution.
    pub fn inverse_at_least(&self, y: f64, hint: Option<f64>) -> Result<f64, DistError> {
        match self {
            Transform::Identity => Ok(y.max(0.0)),
            Transform::Power { exponent } => {
                if y <= 0.0 {
                    Ok(0.0)
                } else {
                    Ok(y.powf(1.0 / exponent))
                }
            }
            Transform::Affine { scale, shift } => Ok(((y - shift) / scale).max(0.0)),
            Transform::Virtual(dist) => virtual_inverse(dist, y, hint),
        }
    }
}

fn virtual_inverse(
    dist: &ValuationDistribution,
    y: f64,
    hint: Option<f64>,
) -> Result<f64, DistError> {
    let (lo, hi) = dist.support();
    // Closed forms for the analytic families. A target above the top of the
    // range is unattainable: no valuation clears it, so the cutoff is +inf.
    if let Some(v) = dist.closed_form_virtual_inverse(y) {
        if hi.is_finite() && v > hi {
            return Ok(f64::INFINITY);
        }
        return Ok(v.max(lo));
    }
    let lo_eff = if dist.pdf(lo) >= super::DENSITY_FLOOR { lo } else { dist.quantile(1e-12) };
    if dist.virtual_valuation(lo_eff)? >= y {
        return Ok(lo);
    }
    let hi_eff = match hint {
        Some(h) if h > lo_eff => h.min(if hi.is_finite() { hi } else { f64::INFINITY }),
        _ if hi.is_finite() => hi,
        _ => dist.quantile(1.0 - 1e-12),
    };
    let top = if hi.is_finite() && hi_eff >= hi {
        dist.virtual_valuation(hi)?
    } else {
        dist.virtual_valuation(hi_eff)?
    };
    if top < y {
        return Ok(f64::INFINITY);
    }
    let tol = BISECT_TOL * hi_eff.abs().max(1.0);
    let psi = |v: f64| dist.virtual_valuation(v).unwrap_or(f64::NEG_INFINITY);
    Ok(root::bisect_increasing(psi, lo_eff, hi_eff, y, tol, BISECT_MAX_ITER))
}

impl ValuationDistribution {
    /// Closed-form inverse of the virtual valuation where one exists.
    pub(crate) fn closed_form_virtual_inverse(&self, y: f64) -> Option<f64> {
        match self.family_kind() {
            FamilyKind::Uniform { hi } => Some(0.5 * (y + hi)),
            FamilyKind::Exponential { rate } => Some(y + 1.0 / rate),
            FamilyKind::Other => None,
        }
    }

    pub(crate) fn family_kind(&self) -> FamilyKind {
        use super::Family;
        match &self.family {
            Family::Uniform { hi, .. } => FamilyKind::Uniform { hi: *hi },
            Family::Exponential { rate } => FamilyKind::Exponential { rate: *rate },
            _ => FamilyKind::Other,
        }
    }
}

pub(crate) enum FamilyKind {
    Uniform { hi: f64 },
    Exponential { rate: f64 },
    Other,
}
