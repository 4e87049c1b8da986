//! Kernels of `Y^D` by quadrature of subordination integrals.
//!
//! Values are exact up to quadrature on flat domains (half-spaces and flat
//! graphs), where the killed heat kernel has the reflection closed form.
//! Elsewhere the heat kernel is replaced by the geometric mean of its
//! two-sided bounds and every derived value is flagged `approximate`.

mod green;
mod heat;
mod martin;

pub use green::{
    cap_area, free_green, free_green_shape, free_green_with, free_jump, green, green_envelope, green_or_infinite,
    green_with, jump_density, jump_density_with, jump_shape, kappa_x, kappa_x_with, killing_density,
    killing_density_with, local_green_shape, poisson_bound, riesz_green, stable_jump, EnvelopeShape, GreenRegime,
};
pub use heat::{free_heat, heat_kernel, heat_kernel_with, ln_free_heat, reflection_factor, HeatBoundConstants};
pub use martin::{martin_kernel, martin_kernel_with, martin_shape, MartinValue, LADDER};

pub(crate) use green::subordinate;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quad::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelValue {
    pub value: f64,
    pub abs_error: f64,
    /// `(lower, upper)` bound shapes of the matching estimate.
    pub envelope: Option<(f64, f64)>,
    /// Set when the value rests on heat-kernel bounds or density envelopes
    /// rather than exact formulas.
    pub approximate: bool,
}

impl KernelValue {
    pub fn exact(value: f64, abs_error: f64) -> Self {
        KernelValue {
            value,
            abs_error,
            envelope: None,
            approximate: false,
        }
    }

    /// The on-diagonal sentinel.
    pub fn infinite() -> Self {
        KernelValue::exact(f64::INFINITY, 0.0)
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Quadrature targets and heat-kernel bound constants.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelSettings {
    pub tol: Tolerance,
    pub heat: HeatBoundConstants,
}

/// `δ(x)` after checking membership.
pub(crate) fn check_in_domain(domain: &Domain, x: &[f64]) -> Result<f64> {
    let dist = domain.distance(x)?;
    if !(dist.value > 0.0) {
        return Err(Error::OutsideDomain(alloc::format!("{x:?}")));
    }
    Ok(dist.value)
}
