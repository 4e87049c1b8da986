//! Local Hardy ratio `ℰ^D(v, v) / ∫ v² φ(δ^{-2})` in the half-space.
//!
//! The form is assembled in its semigroup representation
//! `ℰ^D(v, v) = ∫₀^∞ [‖v‖² − (v, P^D_t v)] μ(t) dt`, which equals the jump
//! plus killing expression without truncating the jump integral. Test
//! functions are separable bumps, so `(v, P^D_t v)` factorizes over the
//! coordinates and the bracket telescopes into nonnegative one-dimensional
//! pieces.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bernstein::BernsteinModel;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::math::erfc;
use crate::quad::{gauss_legendre, integrate_log_scaled, Tolerance};

/// `v(x) = amplitude · Π_{i<d} b((x_i − center_i)/w) · b((x_d − depth)/w)`
/// with `b(u) = (1 − u²)²` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardyTestFunction {
    pub center: Vec<f64>,
    pub depth: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl HardyTestFunction {
    pub fn bump(d: usize, depth: f64, half_width: f64) -> Self {
        HardyTestFunction {
            center: alloc::vec![0.0; d.saturating_sub(1)],
            depth,
            half_width,
            amplitude: 1.0,
        }
    }

    /// `x ↦ v(x / s)`.
    pub fn scaled(&self, s: f64) -> Self {
        HardyTestFunction {
            center: self.center.iter().map(|c| c * s).collect(),
            depth: self.depth * s,
            half_width: self.half_width * s,
            amplitude: self.amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardyReport {
    pub ratio: f64,
    pub energy: f64,
    pub denominator: f64,
    /// Ratio on the coarse grid of `panels / 2` panels per bump.
    pub coarse_ratio: f64,
    pub panels: usize,
    pub relative_change: f64,
}

const NODES: usize = 8;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - u * u;
        s * s
    }
}

fn heat1(t: f64, u: f64) -> f64 {
    (4.0 * PI * t).powf(-0.5) * (-u * u / (4.0 * t)).exp()
}

/// Composite Gauss–Legendre rule.
struct Grid {
    x: Vec<f64>,
    w: Vec<f64>,
    panels: usize,
}

impl Grid {
    fn new(panels: usize) -> Self {
        let (x, w) = gauss_legendre(NODES);
        Grid { x, w, panels }
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        let h = (b - a) / self.panels as f64;
        let mut total = 0.0;
        for p in 0..self.panels {
            let m = a + (p as f64 + 0.5) * h;
            for (x, w) in self.x.iter().zip(&self.w) {
                total += w * f(m + 0.5 * h * x);
            }
        }
        0.5 * h * total
    }

    /// Integral over `[a1, b1] ∪ [a2, b2]` with `a1 ≤ a2`, merged when the
    /// pieces overlap.
    fn integrate_union<F: FnMut(f64) -> f64>(&self, a1: f64, b1: f64, a2: f64, b2: f64, mut f: F) -> f64 {
        if b1 >= a2 {
            self.integrate(a1, b1.max(b2), f)
        } else {
            self.integrate(a1, b1, &mut f) + self.integrate(a2, b2, &mut f)
        }
    }
}

/// Pieces of the telescoped bracket for one bump of half-width `w` centred at `c`.
struct Factor<'a> {
    c: f64,
    w: f64,
    grid: &'a Grid,
    tol: Tolerance,
}

impl Factor<'_> {
    fn g(&self, x: f64) -> f64 {
        bump((x - self.c) / self.w)
    }

    fn norm2(&self) -> f64 {
        self.grid.integrate(self.c - self.w, self.c + self.w, |x| self.g(x).powi(2))
    }

    /// `‖g‖² − (g, P_t g) = ∫₀^∞ p_t(u) ∫ (g(x+u) − g(x))² dx du` on the line.
    fn free_gap(&self, t: f64) -> Result<f64> {
        let (c, w) = (self.c, self.w);
        let inner = |u: f64| {
            self.grid
                .integrate_union(c - w - u, c + w - u, c - w, c + w, |x| (self.g(x + u) - self.g(x)).powi(2))
        };
        let probes = [t.sqrt(), w, 2.0 * w];
        Ok(integrate_log_scaled(|u| heat1(t, u) * inner(u), 0.0, f64::INFINITY, &probes, self.tol)?.value)
    }

    /// `‖h‖² − (h, P^D_t h)` on the half-line: the killed jump part plus
    /// `∫ h² (1 − P_x(τ > t))`.
    fn killed_gap(&self, t: f64) -> Result<f64> {
        let (c, w) = (self.c, self.w);
        let inner = |u: f64| {
            self.grid.integrate_union((c - w - u).max(0.0), c + w - u, c - w, c + w, |x| {
                (self.g(x + u) - self.g(x)).powi(2) * -(-x * (x + u) / t).exp_m1()
            })
        };
        let probes = [t.sqrt(), w, 2.0 * w];
        let jump = integrate_log_scaled(|u| heat1(t, u) * inner(u), 0.0, f64::INFINITY, &probes, self.tol)?.value;
        let kill = self
            .grid
            .integrate(c - w, c + w, |x| self.g(x).powi(2) * erfc(x / (2.0 * t.sqrt())));
        Ok(jump + kill)
    }
}

fn assemble(model: &BernsteinModel, f: &HardyTestFunction, d: usize, panels: usize) -> Result<(f64, f64)> {
    let grid = Grid::new(panels);
    let tol = Tolerance::new(1e-9, 1e-7);
    let w = f.half_width;
    let free: Vec<Factor> = f
        .center
        .iter()
        .map(|&c| Factor { c, w, grid: &grid, tol })
        .collect();
    let normal = Factor { c: f.depth, w, grid: &grid, tol };
    let free_norms: Vec<f64> = free.iter().map(Factor::norm2).collect();
    let normal_norm = normal.norm2();
    let amp2 = f.amplitude * f.amplitude;

    let mut failure = None;
    let mut bracket = |t: f64| -> f64 {
        let mut gaps = Vec::with_capacity(d);
        let mut norms = Vec::with_capacity(d);
        for (k, fac) in free.iter().enumerate() {
            // identical widths make all tangential factors alike
            let gap = if k > 0 && fac.c == free[0].c {
                Ok(gaps[0])
            } else {
                fac.free_gap(t)
            };
            match gap {
                Ok(g) => gaps.push(g),
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            }
            norms.push(free_norms[k]);
        }
        match normal.killed_gap(t) {
            Ok(g) => gaps.push(g),
            Err(e) => {
                failure.get_or_insert(e);
                return 0.0;
            }
        }
        norms.push(normal_norm);
        // Π a − Π b = Σ_k (Π_{i<k} a_i)(a_k − b_k)(Π_{i>k} b_i)
        let mut total = 0.0;
        for k in 0..gaps.len() {
            let mut term = gaps[k];
            for n in &norms[..k] {
                term *= n;
            }
            for i in k + 1..gaps.len() {
                term *= (norms[i] - gaps[i]).max(0.0);
            }
            total += term;
        }
        total * model.mu(t)
    };
    let probes = [w * w, f.depth * f.depth, 1.0];
    let energy = integrate_log_scaled(&mut bracket, 0.0, f64::INFINITY, &probes, tol)?.value * amp2;
    if let Some(e) = failure {
        return Err(e);
    }
    let weighted = grid.integrate(f.depth - w, f.depth + w, |x| {
        normal.g(x).powi(2) * model.phi_unchecked(x.powi(-2))
    });
    let denom = amp2 * free_norms.iter().product::<f64>() * weighted;
    Ok((energy, denom))
}

/// Hardy ratio on the default grid of 8 panels per bump.
pub fn hardy_ratio(domain: &Domain, model: &BernsteinModel, f: &HardyTestFunction) -> Result<f64> {
    hardy_ratio_at(domain, model, f, 8).map(|r| r.ratio)
}

/// Hardy ratio on `panels` panels per bump, checked against `panels / 2`.
pub fn hardy_ratio_at(
    domain: &Domain,
    model: &BernsteinModel,
    f: &HardyTestFunction,
    panels: usize,
) -> Result<HardyReport> {
    model.validate()?;
    let d = match *domain {
        Domain::HalfSpace { d } => d,
        _ => return Err(Error::Unsupported("the Hardy ratio is assembled in the half-space".into())),
    };
    domain.validate()?;
    if f.center.len() + 1 != d {
        return Err(Error::InvalidArgument(format!("test function needs {} tangential centres", d - 1)));
    }
    if !(f.half_width > 0.0 && f.depth > f.half_width && f.depth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bump must sit strictly inside the domain: depth {} half-width {}",
            f.depth, f.half_width
        )));
    }
    if panels < 2 {
        return Err(Error::InvalidArgument("at least two panels are needed".into()));
    }
    if f.amplitude == 0.0 || !f.amplitude.is_finite() {
        return Err(Error::InvalidArgument("test function vanishes; the ratio is undefined".into()));
    }
    let (energy, denominator) = assemble(model, f, d, panels)?;
    let (ce, cd) = assemble(model, f, d, panels / 2)?;
    let ratio = energy / denominator;
    let coarse_ratio = ce / cd;
    let relative_change = (ratio - coarse_ratio).abs() / ratio.abs();
    if !(relative_change <= 0.2) {
        return Err(Error::GridTooCoarse(format!(
            "refinement moved the Hardy ratio by {:.1}%",
            100.0 * relative_change
        )));
    }
    Ok(HardyReport {
        ratio,
        energy,
        denominator,
        coarse_ratio,
        panels,
        relative_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn free_gap_small_time_matches_gradient_energy() {
        // ‖g‖² − (g, P_t g) ≈ t ‖g′‖² as t → 0
        let grid = Grid::new(8);
        let f = Factor { c: 0.0, w: 1.0, grid: &grid, tol: Tolerance::new(1e-14, 1e-10) };
        let tol = Tolerance::new(1e-14, 1e-12);
        let grad = integrate(|u: f64| (4.0 * u * (1.0 - u * u)).powi(2), -1.0, 1.0, tol).unwrap().value;
        let t = 1e-5;
        let gap = f.free_gap(t).unwrap();
        assert!((gap / (t * grad) - 1.0).abs() < 1e-3, "{gap} {}", t * grad);
    }

    #[test]
    fn free_gap_matches_difference_form() {
        let grid = Grid::new(16);
        let f = Factor { c: 0.3, w: 0.5, grid: &grid, tol: Tolerance::new(1e-14, 1e-10) };
        let t = 0.2;
        let tol = Tolerance::new(1e-14, 1e-12);
        let g = |x: f64| bump((x - 0.3) / 0.5);
        let pg = |x: f64| integrate(|y| heat1(t, x - y) * g(y), -0.2, 0.8, tol).unwrap().value;
        let cross = integrate(|x| g(x) * pg(x), -0.2, 0.8, tol).unwrap().value;
        let oracle = f.norm2() - cross;
        assert!((f.free_gap(t).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn killed_gap_matches_difference_form() {
        let f = Factor { c: 1.0, w: 0.5, grid: &Grid::new(64), tol: Tolerance::new(1e-14, 1e-10) };
        let t = 0.7;
        let tol = Tolerance::new(1e-14, 1e-12);
        let h = |x: f64| bump((x - 1.0) / 0.5);
        let k = |x: f64, y: f64| heat1(t, x - y) * -(-x * y / t).exp_m1();
        let ph = |x: f64| integrate(|y| k(x, y) * h(y), 0.5, 1.5, tol).unwrap().value;
        let cross = integrate(|x| h(x) * ph(x), 0.5, 1.5, tol).unwrap().value;
        let oracle = f.norm2() - cross;
        let v = f.killed_gap(t).unwrap();
        assert!((v - oracle).abs() < 1e-8, "{v} {oracle}");
    }

    #[test]
    fn stable_ratio_is_positive_and_scale_free() {
        let h = Domain::half_space(3);
        let m = BernsteinModel::stable(1.0);
        let f = HardyTestFunction::bump(3, 1.0, 0.5);
        let base = hardy_ratio_at(&h, &m, &f, 8).unwrap();
        assert!(base.ratio >= 0.01, "{base:?}");
        for s in [0.25, 0.5] {
            let r = hardy_ratio(&h, &m, &f.scaled(s)).unwrap();
            assert!(r / base.ratio < 4.0 && base.ratio / r < 4.0);
            assert!((r / base.ratio - 1.0).abs() < 1e-4, "{r} {}", base.ratio);
        }
    }

    #[test]
    fn vanishing_test_function_is_rejected() {
        let mut f = HardyTestFunction::bump(3, 1.0, 0.5);
        f.amplitude = 0.0;
        let m = BernsteinModel::stable(1.0);
        assert!(hardy_ratio(&Domain::half_space(3), &m, &f).is_err());
        let b = Domain::Ball { d: 3, radius: 1.0 };
        assert!(hardy_ratio(&b, &m, &HardyTestFunction::bump(3, 1.0, 0.5)).is_err());
    }
}
