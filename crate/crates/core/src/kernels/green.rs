//! Subordination integrals: Green, jump and killing densities.

use alloc::format;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::heat::{heat_bounds, ln_free_heat, reflection_factor, HeatBoundConstants};
use super::{check_in_domain, KernelSettings, KernelValue};
use crate::bernstein::BernsteinModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::Domain;
use crate::math::{dist, erfc, gamma, ln_gamma, sphere_area};
use crate::quad::{integrate_log_scaled, Estimate, Tolerance};

/// `∫₀^∞ k(t) w(t) dt` for a heat kernel `k` peaking near `t = r²`.
///
/// Split at `r²` and `1`; on `(0, r²)` the variable is `s = r²/t`.
pub(crate) fn subordinate<K, W>(k: K, w: W, r2: f64, tol: Tolerance) -> Result<Estimate>
where
    K: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let f = |t: f64| {
        let kv = k(t);
        if kv == 0.0 {
            0.0
        } else {
            kv * w(t)
        }
    };
    let near = integrate_log_scaled(
        |s: f64| f(r2 / s) * r2 / (s * s),
        1.0,
        f64::INFINITY,
        &[1.0, 2.0, 4.0, 8.0],
        tol,
    )?;
    let mut total = near;
    if r2 < 1.0 {
        let mid = integrate_log_scaled(&f, r2, 1.0, &[r2, r2.sqrt(), 1.0], tol)?;
        let far = integrate_log_scaled(&f, 1.0, f64::INFINITY, &[1.0, 4.0, 16.0], tol)?;
        total = total.add(mid).add(far);
    } else {
        let far = integrate_log_scaled(&f, r2, f64::INFINITY, &[r2, 4.0 * r2, 16.0 * r2], tol)?;
        total = total.add(far);
    }
    Ok(total)
}

/// The killed heat kernel for a fixed pair, as a function of time.
fn pair_kernel<'a>(
    domain: &Domain,
    x: &'a [f64],
    y: &'a [f64],
    dx: f64,
    dy: f64,
    constants: HeatBoundConstants,
) -> (impl Fn(f64) -> f64 + 'a, bool) {
    let d = domain.dim();
    let r = dist(x, y);
    let flat = domain.flat_offset();
    let approximate = flat.is_none();
    let k = move |t: f64| match flat {
        Some(c) => ln_free_heat(t, r * r, d).exp() * reflection_factor(x[d - 1] - c, y[d - 1] - c, t),
        None => {
            let (lo, hi) = heat_bounds(d, t, r, dx, dy, constants);
            (lo * hi).sqrt()
        }
    };
    (k, approximate)
}

fn check_transient(domain: &Domain, model: &BernsteinModel) -> Result<()> {
    if domain.dim() == 2 && domain.flat_offset().is_none() && !model.transient_in_plane() {
        return Err(Error::Unsupported(format!(
            "{} is not transient in the plane; the Green integral diverges",
            model.name()
        )));
    }
    Ok(())
}

fn pair_setup(domain: &Domain, model: &BernsteinModel, x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    domain.validate()?;
    model.validate()?;
    let dx = check_in_domain(domain, x)?;
    let dy = check_in_domain(domain, y)?;
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::OnDiagonal);
    }
    Ok((dx, dy, r))
}

/// Green function `U^D(x, y) = ∫ p^D(t, x, y) u(t) dt`.
pub fn green(domain: &Domain, model: &BernsteinModel, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    green_with(domain, model, x, y, &KernelSettings::default())
}

pub fn green_with(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    y: &[f64],
    settings: &KernelSettings,
) -> Result<KernelValue> {
    let (dx, dy, r) = pair_setup(domain, model, x, y)?;
    check_transient(domain, model)?;
    let (k, approximate) = pair_kernel(domain, x, y, dx, dy, settings.heat);
    let e = subordinate(k, |t| model.u(t), r * r, settings.tol)?;
    let shape = local_green_shape(model, domain.dim(), r, dx, dy);
    Ok(KernelValue {
        value: e.value,
        abs_error: e.abs_error,
        envelope: Some((shape, shape)),
        approximate: approximate || !model.has_exact_densities(),
    })
}

/// Green function with `+∞` on the diagonal instead of an error.
pub fn green_or_infinite(domain: &Domain, model: &BernsteinModel, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    match green(domain, model, x, y) {
        Err(Error::OnDiagonal) => Ok(KernelValue::infinite()),
        other => other,
    }
}

/// `(δ(x)δ(y)/r² ∧ 1) φ′(r^{-2}) / (r^{d+2} φ(r^{-2})²)`.
pub fn local_green_shape(model: &BernsteinModel, d: usize, r: f64, dx: f64, dy: f64) -> f64 {
    (dx * dy / (r * r)).min(1.0) * model.ln_kernel_shape(r, d, 2.0).exp()
}

/// The bound families available for the Green function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum GreenRegime {
    /// Any of the domain classes, for `|x - y| ≤ horizon`.
    BoundedNear { horizon: f64 },
    /// Above a bounded graph (or a half-space), all pairs, `d ≥ 3`.
    AboveGraph,
    /// Complement of a compact set, all pairs, `d ≥ 3`.
    ExteriorCompl,
}

/// Lower and upper bound shapes; multiplicative constants are not claimed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeShape {
    pub lower: f64,
    pub upper: f64,
}

pub fn green_envelope(
    regime: GreenRegime,
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    y: &[f64],
) -> Result<EnvelopeShape> {
    let (dx, dy, r) = pair_setup(domain, model, x, y)?;
    let d = domain.dim();
    match regime {
        GreenRegime::BoundedNear { horizon } => {
            if r > horizon {
                return Err(Error::Geometry(format!("|x-y| = {r} exceeds the horizon {horizon}")));
            }
            let s = local_green_shape(model, d, r, dx, dy);
            Ok(EnvelopeShape { lower: s, upper: s })
        }
        GreenRegime::AboveGraph | GreenRegime::ExteriorCompl => {
            if d < 3 {
                return Err(Error::Geometry("global Green bounds need d ≥ 3".into()));
            }
            let fits = match regime {
                GreenRegime::AboveGraph => matches!(domain, Domain::AboveGraph { .. } | Domain::HalfSpace { .. }),
                _ => matches!(domain, Domain::ExteriorBall { .. }),
            };
            if !fits {
                return Err(Error::Geometry(format!("regime {regime:?} does not match {domain:?}")));
            }
            let scale = if regime == GreenRegime::AboveGraph { r } else { r.min(1.0) };
            let f = (dx / scale).min(1.0) * (dy / scale).min(1.0) / r.powi(d as i32 - 2);
            let u = model.u_envelope(r * r)?;
            Ok(EnvelopeShape {
                lower: f * u.lower,
                upper: f * u.upper,
            })
        }
    }
}

/// Free Green function `G_X(x, y) = ∫ p(t, x, y) u(t) dt`.
pub fn free_green(model: &BernsteinModel, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    free_green_with(model, x, y, &KernelSettings::default())
}

pub fn free_green_with(
    model: &BernsteinModel,
    x: &[f64],
    y: &[f64],
    settings: &KernelSettings,
) -> Result<KernelValue> {
    model.validate()?;
    let d = x.len();
    if y.len() != d || d < 2 {
        return Err(invalid(format!("bad dimensions {} and {}", x.len(), y.len())));
    }
    if d == 2 && !model.transient_in_plane() {
        return Err(Error::Unsupported(format!("{} is recurrent in the plane", model.name())));
    }
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::OnDiagonal);
    }
    let e = subordinate(|t| ln_free_heat(t, r * r, d).exp(), |t| model.u(t), r * r, settings.tol)?;
    let shape = free_green_shape(model, d, r);
    Ok(KernelValue {
        value: e.value,
        abs_error: e.abs_error,
        envelope: Some((shape, shape)),
        approximate: !model.has_exact_densities(),
    })
}

/// `φ′(r^{-2}) / (r^{d+2} φ(r^{-2})²)`.
pub fn free_green_shape(model: &BernsteinModel, d: usize, r: f64) -> f64 {
    model.ln_kernel_shape(r, d, 2.0).exp()
}

/// Riesz kernel `(4π)^{-d/2} Γ(d/2 - a) / Γ(a) · (r²/4)^{a - d/2}`, `a = α/2`,
/// the stable free Green function.
pub fn riesz_green(model: &BernsteinModel, d: usize, r: f64) -> Option<f64> {
    if !model.is_stable() {
        return None;
    }
    let a = model.half_alpha();
    let h = 0.5 * d as f64;
    if h <= a {
        return None;
    }
    let ln = -h * (4.0 * PI).ln() + ln_gamma(h - a) - ln_gamma(a) + (a - h) * (0.25 * r * r).ln();
    Some(ln.exp())
}

/// Free jump density `j_X(r) = ∫ p(t, r) μ(t) dt`.
pub fn free_jump(model: &BernsteinModel, d: usize, r: f64, tol: Tolerance) -> Result<Estimate> {
    if !(r > 0.0) {
        return Err(Error::OnDiagonal);
    }
    subordinate(|t| ln_free_heat(t, r * r, d).exp(), |t| model.mu(t), r * r, tol)
}

/// Stable jump density `a/Γ(1-a) (4π)^{-d/2} Γ(d/2 + a) (r²/4)^{-(d/2 + a)}`.
pub fn stable_jump(model: &BernsteinModel, d: usize, r: f64) -> Option<f64> {
    if !model.is_stable() {
        return None;
    }
    let a = model.half_alpha();
    let h = 0.5 * d as f64;
    Some(a / gamma(1.0 - a) * (4.0 * PI).powf(-h) * (ln_gamma(h + a) - (h + a) * (0.25 * r * r).ln()).exp())
}

/// `φ′(r^{-2}) / r^{d+2}`.
pub fn jump_shape(model: &BernsteinModel, d: usize, r: f64) -> f64 {
    (model.ln_phi_prime(-2.0 * r.ln()) - (d as f64 + 2.0) * r.ln()).exp()
}

/// Jump density of `Y^D`, `J^D(x, y) = ∫ p^D(t, x, y) μ(t) dt`.
pub fn jump_density(domain: &Domain, model: &BernsteinModel, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    jump_density_with(domain, model, x, y, &KernelSettings::default())
}

pub fn jump_density_with(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    y: &[f64],
    settings: &KernelSettings,
) -> Result<KernelValue> {
    let (dx, dy, r) = pair_setup(domain, model, x, y)?;
    let (k, approximate) = pair_kernel(domain, x, y, dx, dy, settings.heat);
    let e = subordinate(k, |t| model.mu(t), r * r, settings.tol)?;
    let shape = (dx * dy / (r * r)).min(1.0) * jump_shape(model, domain.dim(), r);
    Ok(KernelValue {
        value: e.value,
        abs_error: e.abs_error,
        envelope: Some((shape, shape)),
        approximate: approximate || !model.has_exact_densities(),
    })
}

fn half_space_height(domain: &Domain, x: &[f64]) -> Result<f64> {
    if domain.flat_offset().is_none() {
        return Err(Error::Unsupported(format!(
            "killing densities are implemented for the half-space only, got {domain:?}"
        )));
    }
    domain.validate()?;
    check_in_domain(domain, x)
}

/// Killing density `κ_D(x) = ∫ (1 - P^D_t 1(x)) μ(t) dt` of the half-space,
/// where `1 - P^D_t 1(x) = erfc(δ / 2√t)`.
pub fn killing_density(domain: &Domain, model: &BernsteinModel, x: &[f64]) -> Result<KernelValue> {
    killing_density_with(domain, model, x, &KernelSettings::default())
}

pub fn killing_density_with(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    settings: &KernelSettings,
) -> Result<KernelValue> {
    model.validate()?;
    let delta = half_space_height(domain, x)?;
    let e = killing_integral(model, delta, settings.tol)?;
    let shape = model.phi_unchecked(delta.powi(-2));
    Ok(KernelValue {
        value: e.value,
        abs_error: e.abs_error,
        envelope: Some((shape, shape)),
        approximate: !model.has_exact_densities(),
    })
}

pub(crate) fn killing_integral(model: &BernsteinModel, delta: f64, tol: Tolerance) -> Result<Estimate> {
    let d2 = delta * delta;
    let f = |t: f64| erfc(delta / (2.0 * t.sqrt())) * model.mu(t);
    let head = integrate_log_scaled(&f, 0.0, d2, &[0.25 * d2, d2], tol)?;
    let tail = integrate_log_scaled(&f, d2, f64::INFINITY, &[d2, 4.0 * d2], tol)?;
    Ok(head.add(tail))
}

/// Area of `{y : |y - x| = r, y_d ≤ 0}` for `x` at height `δ ≤ r`.
pub fn cap_area(d: usize, r: f64, delta: f64) -> f64 {
    if r <= delta {
        return 0.0;
    }
    let theta = (delta / r).acos();
    // I_n = ∫₀^θ sin^n, by the usual two-step recursion
    let (s, c) = (theta.sin(), theta.cos());
    let n = d - 2;
    let mut i0 = theta;
    let mut i1 = 1.0 - c;
    let val = if n == 0 {
        i0
    } else {
        for k in 2..=n {
            let kf = k as f64;
            let ik = -s.powi(k as i32 - 1) * c / kf + (kf - 1.0) / kf * i0;
            i0 = i1;
            i1 = ik;
        }
        i1
    };
    sphere_area(d - 2) * r.powi(d as i32 - 1) * val
}

/// `κ_X^D(x) = ∫_{D^c} j_X(x - y) dy`, by radial integration of `j_X`
/// against the area of the sphere lying outside the half-space.
pub fn kappa_x(domain: &Domain, model: &BernsteinModel, x: &[f64]) -> Result<KernelValue> {
    kappa_x_with(domain, model, x, &KernelSettings::default())
}

pub fn kappa_x_with(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    settings: &KernelSettings,
) -> Result<KernelValue> {
    model.validate()?;
    let delta = half_space_height(domain, x)?;
    let d = domain.dim();
    let inner = settings.tol.scaled(0.1);
    let mut failure = None;
    let f = |r: f64| match free_jump(model, d, r, inner) {
        Ok(j) => j.value * cap_area(d, r, delta),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let f = core::cell::RefCell::new(f);
    let g = |r: f64| (f.borrow_mut())(r);
    let probes = [1.5 * delta, 2.0 * delta, 4.0 * delta];
    let e = integrate_log_scaled(g, delta, f64::INFINITY, &probes, settings.tol)?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(KernelValue {
        value: e.value,
        abs_error: e.abs_error,
        envelope: None,
        approximate: !model.has_exact_densities(),
    })
}

/// Upper bound shape for the jump part of the exit distribution from
/// `B(center, r) ⊂ D`, scaled by `constant`.
#[allow(clippy::too_many_arguments)]
pub fn poisson_bound(
    domain: &Domain,
    model: &BernsteinModel,
    center: &[f64],
    r: f64,
    x: &[f64],
    y: &[f64],
    horizon: f64,
    constant: f64,
) -> Result<f64> {
    model.validate()?;
    let dc = check_in_domain(domain, center)?;
    let dy = check_in_domain(domain, y)?;
    check_in_domain(domain, x)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Geometry(format!("ball radius must lie in (0, 1], got {r}")));
    }
    if dc < r {
        return Err(Error::Geometry("ball is not contained in the domain".into()));
    }
    if dist(x, center) >= r {
        return Err(Error::Geometry("x must lie in the ball".into()));
    }
    let gap = dist(y, center) - r;
    if gap <= 0.0 {
        return Err(Error::Geometry("y must lie outside the closed ball".into()));
    }
    if dist(x, y) > horizon {
        return Err(Error::Geometry(format!("|x-y| exceeds the horizon {horizon}")));
    }
    let d = domain.dim() as f64;
    let ln = dy.ln() + model.ln_phi_prime(-2.0 * gap.ln()) - (d + 3.0) * gap.ln() - model.ln_phi(-2.0 * r.ln());
    Ok(constant * ln.exp())
}
