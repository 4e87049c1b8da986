//! Term densities of the criteria in `s = -ln |x - z|`.
//!
//! Every density is returned in split form `coef·s + rest`, so that the
//! classifier can probe scales like `s = e^{650}` where `r = e^{-s}` is far
//! below the floating-point range.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)]
use num_traits::Float;

use super::Criterion;
use crate::bernstein::BernsteinModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::Profile;
use crate::kernels::subordinate;
use crate::kernels::ln_free_heat;
use crate::math::{sphere_area, LogLinear};
use crate::quad::{integrate, integrate_log, Tolerance};

/// Below this `ln(f(r)/r)` the opening angle of the set is small enough
/// that `sin ψ = ψ` and `cos ψ = 1` to double precision.
const SMALL_ANGLE: f64 = -30.0;

/// Residual multiples of `s` below this are rounding noise.
const COEF_NOISE: f64 = 1e-9;

pub(crate) fn clean(x: LogLinear) -> LogLinear {
    if x.coef.abs() < COEF_NOISE {
        LogLinear::constant(x.rest)
    } else {
        x
    }
}

fn ln_r() -> LogLinear {
    LogLinear::new(-1.0, 0.0)
}

/// `ln [δ² φ(δ^{-2}) φ′(r^{-2}) / (r^{d+4} φ(r^{-2})²)]` with `δ^k` replaced
/// by `δ^{k_δ}`: `k_δ = 2` for the pointwise integrand, `3` for subgraph
/// heights.
fn ln_skbm(
    model: &BernsteinModel,
    k_delta: f64,
    ln_delta: LogLinear,
    ln_r: LogLinear,
    s: f64,
    d: usize,
) -> LogLinear {
    let arg_d = ln_delta.scale(-2.0);
    let arg_r = ln_r.scale(-2.0);
    ln_delta.scale(k_delta) + model.ln_phi_at(arg_d, s) + model.ln_phi_prime_at(arg_r, s)
        - ln_r.scale(d as f64 + 4.0)
        - model.ln_phi_at(arg_r, s).scale(2.0)
}

impl Criterion {
    /// `ln g(x)` of the pointwise integrand with `ln δ(x)` and `ln |x - z|`
    /// in split form.
    pub fn ln_integrand(&self, ln_delta: LogLinear, ln_r: LogLinear, s: f64, d: usize) -> LogLinear {
        match *self {
            Criterion::SkbmIntegral { model }
            | Criterion::SkbmWiener { model }
            | Criterion::SkbmAikawa { model }
            | Criterion::SubgraphSkbm { model } => ln_skbm(&model, 2.0, ln_delta, ln_r, s, d),
            Criterion::KilledStableIntegral { .. } | Criterion::SubgraphKilledStable { .. } => {
                ln_r.scale(-(d as f64))
            }
            Criterion::CensoredIntegral { alpha } | Criterion::SubgraphCensored { alpha } => {
                ln_delta.scale(alpha - 2.0) - ln_r.scale(d as f64 + alpha - 2.0)
            }
        }
    }

    /// The pointwise integrand at boundary distance `delta` and `|x - z| = r`.
    pub fn integrand(&self, delta: f64, r: f64, d: usize) -> f64 {
        let l = self.ln_integrand(
            LogLinear::constant(delta.ln()),
            LogLinear::constant(r.ln()),
            0.0,
            d,
        );
        l.rest.exp()
    }

    /// `ln h(f, ρ)` of the subgraph integrand over `x̃ ∈ R^{d-1}`.
    pub fn ln_subgraph_integrand(&self, ln_f: LogLinear, ln_rho: LogLinear, s: f64, d: usize) -> LogLinear {
        match *self {
            Criterion::SkbmIntegral { model }
            | Criterion::SkbmWiener { model }
            | Criterion::SkbmAikawa { model }
            | Criterion::SubgraphSkbm { model } => ln_skbm(&model, 3.0, ln_f, ln_rho, s, d),
            Criterion::KilledStableIntegral { .. } | Criterion::SubgraphKilledStable { .. } => {
                ln_f - ln_rho.scale(d as f64)
            }
            Criterion::CensoredIntegral { alpha } | Criterion::SubgraphCensored { alpha } => {
                ln_f.scale(alpha - 1.0) - ln_rho.scale(d as f64 + alpha - 2.0)
            }
        }
    }
}

/// `ln A(s)` for the `(d-1)`-dimensional subgraph integral:
/// `A = ω_{d-2} ρ^{d-1} h(f(ρ), ρ)` at `ρ = e^{-s}`.
pub(crate) fn subgraph_density(c: &Criterion, profile: &Profile, d: usize, s: f64) -> LogLinear {
    let ln_f = profile.ln_value(s, 0.0);
    if ln_f.is_neg_infinite() {
        return LogLinear::NEG_INFINITY;
    }
    let ln_rho = ln_r();
    clean(
        LogLinear::constant(sphere_area(d - 2).ln())
            + ln_rho.scale(d as f64 - 1.0)
            + c.ln_subgraph_integrand(ln_f, ln_rho, s, d),
    )
}

/// Opening angle `ψ_max(r)` of the subgraph in the plane through the
/// `x_d`-axis, `x_d = r sin ψ`, as `ln ψ_max` in split form.
fn ln_opening_angle(profile: &Profile, s: f64) -> Result<LogLinear> {
    let ratio = profile.ln_value(s, 0.0) + LogLinear::new(1.0, 0.0);
    if ratio.is_neg_infinite() {
        return Ok(LogLinear::NEG_INFINITY);
    }
    let r0 = ratio.eval(s);
    if r0 < SMALL_ANGLE {
        return Ok(ratio);
    }
    // h(ψ) = ln sin ψ − ln(f(r cos ψ)/r) is increasing in ψ
    let h = |psi: f64| {
        let extra = -psi.cos().ln();
        let lf = profile.ln_value(s, extra) + LogLinear::new(1.0, 0.0);
        psi.sin().ln() - lf.eval(s)
    };
    let mut hi = if r0 >= 0.0 { FRAC_PI_2 * (1.0 - 1e-12) } else { r0.exp().min(1.0).asin() };
    if h(hi) < 0.0 {
        hi = FRAC_PI_2 * (1.0 - 1e-12);
        if h(hi) < 0.0 {
            return Err(Error::Geometry("profile does not close below the axis".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let psi = 0.5 * (lo + hi);
    Ok(ratio + LogLinear::constant(psi.ln() - r0))
}

/// `ln A(s)` for a `d`-dimensional integral over the subgraph of `profile`,
/// `A(s) = r^d ω_{d-2} ∫₀^{ψ_max} g(x) cos^{d-2}ψ dψ`, `r = e^{-s}`.
///
/// `weight(t)` multiplies `g` at `ψ = ψ_max t`.
pub(crate) fn shell_density_weighted<W: FnMut(f64) -> f64>(
    c: &Criterion,
    profile: &Profile,
    d: usize,
    s: f64,
    tol: Tolerance,
    mut weight: W,
) -> Result<LogLinear> {
    let ln_psi = ln_opening_angle(profile, s)?;
    if ln_psi.is_neg_infinite() {
        return Ok(LogLinear::NEG_INFINITY);
    }
    let psi = ln_psi.eval(s).exp();
    let small = psi < (SMALL_ANGLE).exp();
    let lr = ln_r();
    let ln_delta = |t: f64| {
        let rel = if small { t.ln() } else { ((psi * t).sin() / psi).ln() };
        lr + ln_psi + LogLinear::constant(rel)
    };
    let base = c.ln_integrand(ln_delta(1.0), lr, s, d);
    let inner = integrate_log(
        |t: f64| {
            let g = c.ln_integrand(ln_delta(t), lr, s, d);
            let cosw = if small { 1.0 } else { (psi * t).cos().powi(d as i32 - 2) };
            (g.rest - base.rest).exp() * cosw * weight(t)
        },
        0.0,
        1.0,
        tol,
    )?;
    if !(inner.value > 0.0) {
        return Ok(LogLinear::NEG_INFINITY);
    }
    Ok(clean(
        lr.scale(d as f64)
            + LogLinear::constant(sphere_area(d - 2).ln() + inner.value.ln())
            + ln_psi
            + base,
    ))
}

pub(crate) fn shell_density(c: &Criterion, profile: &Profile, d: usize, s: f64, tol: Tolerance) -> Result<LogLinear> {
    shell_density_weighted(c, profile, d, s, tol, |_| 1.0)
}

/// `K₀ = ∂_{x_d} U^D(x, x₀)` at the boundary point under `x₀`, for the
/// half-space: `∫ p(t, 0, x₀) (h/t) u(t) dt` with `h = δ(x₀)`.
pub(crate) fn green_boundary_slope(model: &BernsteinModel, d: usize, h: f64, tol: Tolerance) -> Result<f64> {
    let k = |t: f64| ln_free_heat(t, h * h, d).exp() * h / t;
    Ok(subordinate(k, |t| model.u(t), h * h, tol)?.value)
}

/// `ln w(n)`, the Wiener weight `2^{n(d+4)} φ′(2^{2n}) / φ(2^{2n})²`.
pub fn ln_wiener_weight(model: &BernsteinModel, n: u32, d: usize) -> f64 {
    let l = 2.0 * n as f64 * core::f64::consts::LN_2;
    n as f64 * (d as f64 + 4.0) * core::f64::consts::LN_2 + model.ln_phi_prime(l) - 2.0 * model.ln_phi(l)
}

/// `∫ e^{ln A(s)} ds` over the dyadic annulus `2^{-n-1} ≤ r < 2^{-n}`.
pub(crate) fn annulus_integral<F: FnMut(f64) -> Result<LogLinear>>(
    mut ln_a: F,
    n: u32,
    tol: Tolerance,
) -> Result<f64> {
    let a = n as f64 * core::f64::consts::LN_2;
    let b = a + core::f64::consts::LN_2;
    let mut err = None;
    let est = integrate(
        |s| match ln_a(s) {
            Ok(v) => v.eval(s).exp(),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// Points of the half-plane section at `(s, t)`: `x = (r cos ψ, 0, …, r sin ψ)`
/// with `ψ = ψ_max t`.
pub(crate) fn section_point(d: usize, r: f64, psi: f64) -> Vec<f64> {
    let mut x = alloc::vec![0.0; d];
    x[0] = r * psi.cos();
    x[d - 1] = r * psi.sin();
    x
}

/// Plain opening angle for moderate `s`.
pub(crate) fn opening_angle(profile: &Profile, s: f64) -> Result<f64> {
    Ok(ln_opening_angle(profile, s)?.eval(s).exp())
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    Ok(())
}
