//! Martin kernel by boundary extrapolation of Green-function ratios.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::green::green_with;
use super::{check_in_domain, KernelSettings};
use crate::bernstein::BernsteinModel;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::math::dist;

/// First and last rung of the ladder `y_j = z + 2^{-j} n`.
pub const LADDER: (u32, u32) = (3, 14);

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MartinValue {
    pub value: f64,
    /// Difference of the last two extrapolants.
    pub extrapolation_residual: f64,
    /// `(lower, upper)` shape from the boundary estimate, constants not claimed.
    pub envelope: Option<(f64, f64)>,
    /// Ratios `U^D(x, y_j) / U^D(x₀, y_j)` along the ladder.
    pub ratios: Vec<f64>,
    pub approximate: bool,
}

/// `δ(x) φ′(|x-z|^{-2}) / (|x-z|^{d+4} φ(|x-z|^{-2})²)`.
pub fn martin_shape(model: &BernsteinModel, d: usize, delta: f64, rho: f64) -> f64 {
    delta * model.ln_kernel_shape(rho, d, 4.0).exp()
}

/// `M^D_Y(x, z) = lim_{y→z} U^D(x, y) / U^D(x₀, y)` along the inward normal,
/// with two-point Richardson extrapolation in the step `2^{-j}`.
pub fn martin_kernel(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    z: &[f64],
    x0: &[f64],
) -> Result<MartinValue> {
    martin_kernel_with(domain, model, x, z, x0, &KernelSettings::default())
}

pub fn martin_kernel_with(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    z: &[f64],
    x0: &[f64],
    settings: &KernelSettings,
) -> Result<MartinValue> {
    domain.validate()?;
    model.validate()?;
    let delta = check_in_domain(domain, x)?;
    check_in_domain(domain, x0)?;
    let n = domain.inward_normal(z)?;
    let mut ratios = Vec::new();
    let mut extrapolants: Vec<f64> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    let mut approximate = false;
    let mut growth = 0;
    for j in LADDER.0..=LADDER.1 {
        let h = (-(j as f64)).exp2();
        let y: Vec<f64> = z.iter().zip(&n).map(|(a, b)| a + h * b).collect();
        if !domain.contains(&y) {
            return Err(Error::Geometry("normal ladder leaves the domain".into()));
        }
        let q = if x == x0 {
            1.0
        } else {
            let a = green_with(domain, model, x, &y, settings)?;
            let b = green_with(domain, model, x0, &y, settings)?;
            approximate |= a.approximate || b.approximate;
            if !(b.value > 0.0) || !a.value.is_finite() {
                return Err(Error::Quadrature(alloc::format!("degenerate Green ratio at step {j}")));
            }
            a.value / b.value
        };
        if let Some(prev) = ratios.last() {
            extrapolants.push(2.0 * q - prev);
        }
        ratios.push(q);
        if extrapolants.len() >= 2 {
            let k = extrapolants.len();
            let res = (extrapolants[k - 1] - extrapolants[k - 2]).abs();
            let floor = 1e-7 * extrapolants[k - 1].abs();
            if let Some(last) = residuals.last() {
                if res > *last && res > floor {
                    growth += 1;
                    if growth >= 2 {
                        return Err(Error::ExtrapolationDiverged { steps: ratios.len() });
                    }
                } else {
                    growth = 0;
                }
            }
            residuals.push(res);
            if res <= 1e-10 * extrapolants[k - 1].abs() {
                break;
            }
        }
    }
    let value = *extrapolants.last().unwrap_or(&ratios[0]);
    let residual = residuals.last().copied().unwrap_or(0.0);
    let rho = dist(x, z);
    let shape = martin_shape(model, domain.dim(), delta, rho);
    Ok(MartinValue {
        value: value.max(0.0),
        extrapolation_residual: residual,
        envelope: Some((shape, shape)),
        ratios,
        approximate,
    })
}
