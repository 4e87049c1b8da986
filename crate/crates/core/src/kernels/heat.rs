//! Transition densities of the free and killed Brownian motion.

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::{check_in_domain, KernelValue};
use crate::error::{invalid, Result};
use crate::geometry::Domain;
use crate::math::dist;
use crate::normalization::EXPONENT_DENOMINATOR;

/// Constants of the two-sided heat kernel bounds used off the flat domains.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatBoundConstants {
    /// Exponent constant of the upper bound, `exp(-c_up |x-y|²/t)`.
    pub c_up: f64,
    /// Exponent constant of the lower bound.
    pub c_lo: f64,
}

impl Default for HeatBoundConstants {
    fn default() -> Self {
        HeatBoundConstants { c_up: 0.125, c_lo: 0.5 }
    }
}

/// `ln p(t, x, y)` from the squared distance.
pub fn ln_free_heat(t: f64, r2: f64, d: usize) -> f64 {
    -0.5 * d as f64 * (EXPONENT_DENOMINATOR * PI * t).ln() - r2 / (EXPONENT_DENOMINATOR * t)
}

/// `p(t, x, y) = (4πt)^{-d/2} exp(-|x-y|²/4t)`.
pub fn free_heat(t: f64, x: &[f64], y: &[f64]) -> f64 {
    let r = dist(x, y);
    ln_free_heat(t, r * r, x.len()).exp()
}

/// Survival factor `p^D / p = 1 - exp(-ab/t)` of the half-space, for heights
/// `a, b` above the boundary.
pub fn reflection_factor(a: f64, b: f64, t: f64) -> f64 {
    -(-a * b / t).exp_m1()
}

/// Killed heat kernel `p^D(t, x, y)`, exact for flat domains and the
/// geometric mean of the two-sided bounds elsewhere.
pub fn heat_kernel(domain: &Domain, t: f64, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    heat_kernel_with(domain, t, x, y, HeatBoundConstants::default())
}

pub fn heat_kernel_with(
    domain: &Domain,
    t: f64,
    x: &[f64],
    y: &[f64],
    constants: HeatBoundConstants,
) -> Result<KernelValue> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(alloc::format!("t must be positive, got {t}")));
    }
    let dx = check_in_domain(domain, x)?;
    let dy = check_in_domain(domain, y)?;
    let d = domain.dim();
    let r = dist(x, y);
    if let Some(c) = domain.flat_offset() {
        let a = x[d - 1] - c;
        let b = y[d - 1] - c;
        let p = ln_free_heat(t, r * r, d).exp() * reflection_factor(a, b, t);
        return Ok(KernelValue::exact(p, 0.0));
    }
    let (lo, hi) = heat_bounds(d, t, r, dx, dy, constants);
    Ok(KernelValue {
        value: (lo * hi).sqrt(),
        abs_error: hi - lo,
        envelope: Some((lo, hi)),
        approximate: true,
    })
}

/// Lower and upper heat kernel bounds with normalizing constant `(4π)^{-d/2}`.
pub(crate) fn heat_bounds(
    d: usize,
    t: f64,
    r: f64,
    dx: f64,
    dy: f64,
    c: HeatBoundConstants,
) -> (f64, f64) {
    let norm = (EXPONENT_DENOMINATOR * PI).powf(-0.5 * d as f64) * t.powf(-0.5 * d as f64);
    let st = t.sqrt();
    let lo_f = (dx / st).min(1.0) * (dy / st).min(1.0);
    let hi_f = (dx / st.min(1.0)).min(1.0) * (dy / st.min(1.0)).min(1.0);
    let lo = norm * lo_f * (-c.c_lo * r * r / t).exp();
    let hi = norm * hi_f * (-c.c_up * r * r / t).exp();
    (lo, hi.max(lo))
}
