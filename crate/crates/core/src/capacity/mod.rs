//! Green energies through the comparable measure `σ_v`, cube energies,
//! quasi-additivity diagnostics and the local Hardy ratio.
//!
//! Exact capacities `Cap_D(E)` are never computed. Wherever a Green energy
//! `γ_v(E)` is needed, `σ_v(E) = ∫_E v² φ(δ^{-2}) dx` stands in for it.

mod hardy;

pub use hardy::{hardy_ratio, hardy_ratio_at, HardyReport, HardyTestFunction};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bernstein::BernsteinModel;
use crate::error::{Error, Result};
use crate::geometry::{Domain, RegionSet, WhitneyCube, WhitneyDecomposition, Window};
use crate::kernels::{green_with, local_green_shape, KernelSettings};
use crate::math::dist;
use crate::quad::{gauss_legendre, integrate, integrate_log, Tolerance};

/// `r^d φ(r^{-2})`, the shape of the capacity of a ball of radius `r ≤ 1`.
pub fn ball_capacity_shape(model: &BernsteinModel, r: f64, d: usize) -> Result<f64> {
    model.validate()?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidArgument(format!("radius must lie in (0, 1], got {r}")));
    }
    Ok(r.powi(d as i32) * model.phi_unchecked(r.powi(-2)))
}

/// The weight `v` in `σ_v`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Weight {
    One,
    /// `v(x) = min(U^D(x, x₀), 1)`.
    GreenCapped { x0: Vec<f64> },
}

impl Weight {
    pub fn is_one(&self) -> bool {
        matches!(self, Weight::One)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum EnergyMethod {
    SigmaComparable,
    BallFormula,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyEstimate {
    pub value: f64,
    pub abs_error: f64,
    pub method: EnergyMethod,
    pub cube_terms: Option<Vec<f64>>,
}

/// Cubature knobs for `σ_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubatureSettings {
    /// Gauss–Legendre nodes per axis on each box.
    pub nodes: usize,
    pub tol: Tolerance,
    /// Maximum bisection depth of the adaptive tensor rule.
    pub max_depth: u32,
    /// Green-function targets for [`Weight::GreenCapped`].
    pub kernel: KernelSettings,
}

impl Default for CubatureSettings {
    fn default() -> Self {
        CubatureSettings {
            nodes: 4,
            tol: Tolerance::new(1e-13, 1e-9),
            max_depth: 6,
            kernel: KernelSettings {
                tol: Tolerance::new(1e-12, 1e-7),
                ..KernelSettings::default()
            },
        }
    }
}

/// `v(x)`; the Green value falls back to its local bound shape where the
/// quadrature is unavailable.
pub fn weight_value(
    domain: &Domain,
    model: &BernsteinModel,
    v: &Weight,
    x: &[f64],
    settings: &KernelSettings,
) -> Result<f64> {
    match v {
        Weight::One => Ok(1.0),
        Weight::GreenCapped { x0 } => match green_with(domain, model, x, x0, settings) {
            Ok(g) => Ok(g.value.min(1.0)),
            Err(Error::OnDiagonal) => Ok(1.0),
            Err(Error::Unsupported(_)) | Err(Error::Quadrature(_)) => {
                let dx = domain.distance(x)?.value;
                let dy = domain.distance(x0)?.value;
                Ok(local_green_shape(model, domain.dim(), dist(x, x0), dx, dy).min(1.0))
            }
            Err(e) => Err(e),
        },
    }
}

/// `φ(δ(x)^{-2})`.
fn phi_delta(domain: &Domain, model: &BernsteinModel, x: &[f64]) -> Result<f64> {
    let delta = domain.distance(x)?.value;
    Ok(model.phi_unchecked(delta.powi(-2)))
}

/// `∫_{[lo, hi]} v² φ(δ^{-2})` over a box inside `D`.
pub fn box_sigma(
    domain: &Domain,
    model: &BernsteinModel,
    lo: &[f64],
    hi: &[f64],
    v: &Weight,
    settings: &CubatureSettings,
) -> Result<(f64, f64)> {
    let d = domain.dim();
    if lo.len() != d || hi.len() != d {
        return Err(Error::InvalidArgument("box dimension mismatch".into()));
    }
    if lo.iter().zip(hi).any(|(a, b)| b <= a) {
        return Ok((0.0, 0.0));
    }
    if let (Some(c), true) = (domain.flat_offset(), v.is_one()) {
        // the integrand depends on the height only
        let area: f64 = lo[..d - 1].iter().zip(&hi[..d - 1]).map(|(a, b)| b - a).product();
        let (a, b) = (lo[d - 1] - c, hi[d - 1] - c);
        if a < 0.0 {
            return Err(Error::OutsideDomain(format!("box reaches below the boundary at {}", lo[d - 1])));
        }
        let e = if a == 0.0 {
            integrate_log(|t| model.phi_unchecked(t.powi(-2)), 0.0, b, settings.tol)?
        } else {
            integrate(|t| model.phi_unchecked(t.powi(-2)), a, b, settings.tol)?
        };
        return Ok((area * e.value, area * e.abs_error));
    }
    if domain.box_outside(lo, hi) {
        return Ok((0.0, 0.0));
    }
    let f = |x: &[f64]| -> Result<f64> {
        let w = weight_value(domain, model, v, x, &settings.kernel)?;
        Ok(w * w * phi_delta(domain, model, x)?)
    };
    adaptive_box(&f, lo, hi, settings, 0)
}

pub(crate) fn tensor_rule<F: Fn(&[f64]) -> Result<f64>>(f: &F, lo: &[f64], hi: &[f64], nodes: usize) -> Result<f64> {
    let d = lo.len();
    let (x, w) = gauss_legendre(nodes);
    let mut idx = vec![0usize; d];
    let mut p = vec![0.0; d];
    let mut total = 0.0;
    let jac: f64 = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).product();
    loop {
        let mut wt = 1.0;
        for i in 0..d {
            p[i] = 0.5 * (lo[i] + hi[i]) + 0.5 * (hi[i] - lo[i]) * x[idx[i]];
            wt *= w[idx[i]];
        }
        total += wt * f(&p)?;
        let mut i = 0;
        while i < d {
            idx[i] += 1;
            if idx[i] < nodes {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    Ok(total * jac)
}

fn adaptive_box<F: Fn(&[f64]) -> Result<f64>>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    settings: &CubatureSettings,
    depth: u32,
) -> Result<(f64, f64)> {
    let d = lo.len();
    let whole = tensor_rule(f, lo, hi, settings.nodes)?;
    let mut parts = 0.0;
    let mut children = Vec::with_capacity(1 << d);
    for mask in 0..(1usize << d) {
        let mut clo = lo.to_vec();
        let mut chi = hi.to_vec();
        for i in 0..d {
            let m = 0.5 * (lo[i] + hi[i]);
            if mask >> i & 1 == 1 {
                clo[i] = m;
            } else {
                chi[i] = m;
            }
        }
        parts += tensor_rule(f, &clo, &chi, settings.nodes)?;
        children.push((clo, chi));
    }
    let err = (parts - whole).abs();
    if err <= settings.tol.abs.max(settings.tol.rel * parts.abs()) || depth >= settings.max_depth {
        return Ok((parts, err));
    }
    let mut total = 0.0;
    let mut total_err = 0.0;
    let child_settings = CubatureSettings {
        tol: Tolerance {
            abs: settings.tol.abs / (1 << d) as f64,
            ..settings.tol
        },
        ..*settings
    };
    for (clo, chi) in children {
        let (v, e) = adaptive_box(f, &clo, &chi, &child_settings, depth + 1)?;
        total += v;
        total_err += e;
    }
    Ok((total, total_err))
}

/// `σ_v(E) = ∫_E v(x)² φ(δ(x)^{-2}) dx`, clipped to `window` when given.
/// Subgraph sets must be clipped.
pub fn sigma_v(
    domain: &Domain,
    model: &BernsteinModel,
    set: &RegionSet,
    v: &Weight,
    window: Option<&Window>,
) -> Result<EnergyEstimate> {
    sigma_v_with(domain, model, set, v, window, &CubatureSettings::default())
}

pub fn sigma_v_with(
    domain: &Domain,
    model: &BernsteinModel,
    set: &RegionSet,
    v: &Weight,
    window: Option<&Window>,
    settings: &CubatureSettings,
) -> Result<EnergyEstimate> {
    domain.validate()?;
    model.validate()?;
    let d = domain.dim();
    let clip = |lo: &[f64], hi: &[f64]| -> (Vec<f64>, Vec<f64>) {
        match window {
            Some(w) => (
                lo.iter().zip(&w.lo).map(|(a, b)| a.max(*b)).collect(),
                hi.iter().zip(&w.hi).map(|(a, b)| a.min(*b)).collect(),
            ),
            None => (lo.to_vec(), hi.to_vec()),
        }
    };
    match set {
        RegionSet::Empty => Ok(EnergyEstimate {
            value: 0.0,
            abs_error: 0.0,
            method: EnergyMethod::SigmaComparable,
            cube_terms: Some(Vec::new()),
        }),
        RegionSet::CubeUnion { cubes } => {
            let mut terms = Vec::with_capacity(cubes.len());
            let mut err = 0.0;
            for c in cubes {
                let (lo, hi) = clip(&c.corner, &c.upper());
                let (val, e) = box_sigma(domain, model, &lo, &hi, v, settings)?;
                terms.push(val);
                err += e;
            }
            Ok(EnergyEstimate {
                value: terms.iter().sum(),
                abs_error: err,
                method: EnergyMethod::SigmaComparable,
                cube_terms: Some(terms),
            })
        }
        _ => {
            let w = window.ok_or_else(|| {
                Error::InvalidArgument(format!("{} set is unbounded; a clipping window is required", set.name()))
            })?;
            set.validate(domain, &vec![0.0; d])?;
            let profile = set.profile().expect("subgraph sets carry a profile");
            let floor = w.lo[d - 1].max(0.0);
            if floor == 0.0 && !boundary_integrable(model) {
                return Ok(EnergyEstimate {
                    value: f64::INFINITY,
                    abs_error: 0.0,
                    method: EnergyMethod::SigmaComparable,
                    cube_terms: None,
                });
            }
            let tol = settings.tol;
            let kernel = settings.kernel;
            // outer cubature over x̃, inner integral over the height
            let f = |xt: &[f64]| -> Result<f64> {
                let rho = xt.iter().map(|u| u * u).sum::<f64>().sqrt();
                let top = profile.value(rho).min(w.hi[d - 1]);
                if top <= floor {
                    return Ok(0.0);
                }
                let mut failure = None;
                let mut x = xt.to_vec();
                x.push(0.0);
                let g = |t: f64| {
                    x[d - 1] = t;
                    let wv = match weight_value(domain, model, v, &x, &kernel) {
                        Ok(w) => w,
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    };
                    wv * wv * model.phi_unchecked(t.powi(-2))
                };
                let e = if floor == 0.0 {
                    integrate_log(g, 0.0, top, tol)?
                } else {
                    integrate(g, floor, top, tol)?
                };
                if let Some(err) = failure {
                    return Err(err);
                }
                Ok(e.value)
            };
            let outer = CubatureSettings {
                max_depth: settings.max_depth.min(4),
                ..*settings
            };
            let (val, err) = adaptive_box(&f, &w.lo[..d - 1], &w.hi[..d - 1], &outer, 0)?;
            Ok(EnergyEstimate {
                value: val,
                abs_error: err,
                method: EnergyMethod::SigmaComparable,
                cube_terms: None,
            })
        }
    }
}

/// Whether `∫₀ φ(t^{-2}) dt < ∞`, read off the growth exponent of `φ`.
fn boundary_integrable(model: &BernsteinModel) -> bool {
    let l = 400.0;
    2.0 * (model.ln_phi(l + 1.0) - model.ln_phi(l)) < 1.0 - 1e-6
}

/// The part of a Whitney cube that belongs to `E`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum CubeSubset {
    Full,
    Empty,
    SubBox { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeEnergy {
    /// `σ_v(E ∩ Q_j)`, the substitute for `γ_v(E ∩ Q_j)`.
    pub energy: EnergyEstimate,
    /// `σ₁(E ∩ Q_j)`.
    pub sigma_one: f64,
    /// `v(x_j)` at the cube centre.
    pub weight_at_center: f64,
    /// `v(x_j)² σ₁(E ∩ Q_j)`, the per-cube cross-check.
    pub center_weighted: f64,
}

pub fn cube_energy(
    domain: &Domain,
    model: &BernsteinModel,
    cube: &WhitneyCube,
    subset: &CubeSubset,
    v: &Weight,
) -> Result<CubeEnergy> {
    cube_energy_with(domain, model, cube, subset, v, &CubatureSettings::default())
}

pub fn cube_energy_with(
    domain: &Domain,
    model: &BernsteinModel,
    cube: &WhitneyCube,
    subset: &CubeSubset,
    v: &Weight,
    settings: &CubatureSettings,
) -> Result<CubeEnergy> {
    let d = domain.dim();
    if cube.corner.len() != d {
        return Err(Error::InvalidArgument("cube dimension mismatch".into()));
    }
    let upper = cube.upper();
    let (lo, hi) = match subset {
        CubeSubset::Full => (cube.corner.clone(), upper.clone()),
        CubeSubset::Empty => (cube.corner.clone(), cube.corner.clone()),
        CubeSubset::SubBox { lo, hi } => {
            let inside = lo.len() == d
                && hi.len() == d
                && (0..d).all(|i| cube.corner[i] <= lo[i] && lo[i] <= hi[i] && hi[i] <= upper[i]);
            if !inside {
                return Err(Error::InvalidArgument("subset is not contained in the cube".into()));
            }
            (lo.clone(), hi.clone())
        }
    };
    let (val, err) = box_sigma(domain, model, &lo, &hi, v, settings)?;
    let (one, _) = box_sigma(domain, model, &lo, &hi, &Weight::One, settings)?;
    let wc = weight_value(domain, model, v, &cube.center(), &settings.kernel)?;
    Ok(CubeEnergy {
        energy: EnergyEstimate {
            value: val,
            abs_error: err,
            method: EnergyMethod::SigmaComparable,
            cube_terms: None,
        },
        sigma_one: one,
        weight_at_center: wc,
        center_weighted: wc * wc * one,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuasiAdditivityReport {
    /// `σ_v(E)` by cubature over `E`.
    pub direct: f64,
    /// `Σ_j v(x_j)² σ₁(E ∩ Q_j)`.
    pub cube_sum: f64,
    pub ratio: f64,
    /// Number of Whitney cubes meeting `E`.
    pub cubes: usize,
}

/// Compares `γ_v(E)` with the sum of its per-cube pieces, both through the
/// `σ_v` substitute, for `E` a union of boxes inside `B(z, radius)`.
pub fn quasi_additivity_report(
    domain: &Domain,
    model: &BernsteinModel,
    decomposition: &WhitneyDecomposition,
    set: &RegionSet,
    z: &[f64],
    radius: f64,
    v: &Weight,
) -> Result<QuasiAdditivityReport> {
    let settings = CubatureSettings::default();
    let cubes = match set {
        RegionSet::CubeUnion { cubes } => cubes,
        RegionSet::Empty => {
            return Ok(QuasiAdditivityReport {
                direct: 0.0,
                cube_sum: 0.0,
                ratio: 1.0,
                cubes: 0,
            })
        }
        _ => return Err(Error::Unsupported("quasi-additivity is checked on cube unions".into())),
    };
    for c in cubes {
        let (_, far) = crate::geometry::box_distance_range(&c.corner, c.side, z);
        if far > radius * (1.0 + 1e-12) {
            return Err(Error::Geometry(format!("set leaves B(z, {radius})")));
        }
    }
    let direct = sigma_v_with(domain, model, set, v, None, &settings)?.value;
    let mut cube_sum = 0.0;
    let mut meeting = 0;
    let mut covered = vec![0.0; cubes.len()];
    for q in &decomposition.cubes {
        let qu = q.upper();
        let mut one = 0.0;
        let mut hit = false;
        for (k, c) in cubes.iter().enumerate() {
            let cu = c.upper();
            let lo: Vec<f64> = q.corner.iter().zip(&c.corner).map(|(a, b)| a.max(*b)).collect();
            let hi: Vec<f64> = qu.iter().zip(&cu).map(|(a, b)| a.min(*b)).collect();
            if lo.iter().zip(&hi).any(|(a, b)| b <= a) {
                continue;
            }
            hit = true;
            covered[k] += lo.iter().zip(&hi).map(|(a, b)| b - a).product::<f64>();
            one += box_sigma(domain, model, &lo, &hi, &Weight::One, &settings)?.0;
        }
        if hit {
            meeting += 1;
            let w = weight_value(domain, model, v, &q.center(), &settings.kernel)?;
            cube_sum += w * w * one;
        }
    }
    for (k, c) in cubes.iter().enumerate() {
        if covered[k] < c.volume() * (1.0 - 1e-9) {
            return Err(Error::GridTooCoarse(
                "the decomposition does not cover the set; enlarge its window or generations".into(),
            ));
        }
    }
    Ok(QuasiAdditivityReport {
        direct,
        cube_sum,
        ratio: if cube_sum > 0.0 { direct / cube_sum } else { 1.0 },
        cubes: meeting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::whitney_decompose;

    fn h3() -> Domain {
        Domain::half_space(3)
    }

    fn unit_cube(corner: [f64; 3], side: f64) -> WhitneyCube {
        WhitneyCube {
            generation: 0,
            corner: corner.to_vec(),
            side,
            diam: side * 3f64.sqrt(),
            dist: corner[2],
            rim: false,
            window_limited: false,
        }
    }

    #[test]
    fn ball_shape_examples() {
        let m = BernsteinModel::stable(1.0);
        assert!((ball_capacity_shape(&m, 0.5, 3).unwrap() - 0.25).abs() < 1e-15);
        assert!(ball_capacity_shape(&m, 1.5, 3).is_err());
        for mm in [m, BernsteinModel::geometric(1.0)] {
            let mut last = 0.0;
            for r in crate::math::logspace(1e-3, 0.5, 20) {
                let a = ball_capacity_shape(&mm, r, 3).unwrap();
                let b = ball_capacity_shape(&mm, 2.0 * r, 3).unwrap();
                assert!(b / a <= 8.0 + 1e-12);
                assert!(a > last);
                last = a;
            }
        }
    }

    #[test]
    fn sigma_one_on_box_closed_form() {
        // ∫ over [0,1]² × [1,2] of δ^{-1} = ln 2
        let m = BernsteinModel::stable(1.0);
        let set = RegionSet::CubeUnion {
            cubes: vec![unit_cube([0.0, 0.0, 1.0], 1.0)],
        };
        let e = sigma_v(&h3(), &m, &set, &Weight::One, None).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-9);
        assert_eq!(sigma_v(&h3(), &m, &RegionSet::Empty, &Weight::One, None).unwrap().value, 0.0);
    }

    #[test]
    fn general_cubature_matches_separable_path() {
        // same box above a flat graph of height 0 vs the half-space with the
        // generic tensor rule forced through a non-flat weight of 1
        let m = BernsteinModel::geometric(1.0);
        let lo = [0.0, 0.0, 0.5];
        let hi = [0.5, 0.5, 1.0];
        let (a, _) = box_sigma(&h3(), &m, &lo, &hi, &Weight::One, &CubatureSettings::default()).unwrap();
        let f = |x: &[f64]| -> Result<f64> { Ok(m.phi_unchecked(x[2].powi(-2))) };
        let (b, _) = adaptive_box(&f, &lo, &hi, &CubatureSettings::default(), 0).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn additivity_over_disjoint_cubes() {
        let m = BernsteinModel::stable(1.0);
        let q1 = unit_cube([0.0, 0.0, 1.0], 0.5);
        let q2 = unit_cube([0.5, 0.0, 1.0], 0.5);
        let s = |c: Vec<WhitneyCube>| {
            sigma_v(&h3(), &m, &RegionSet::CubeUnion { cubes: c }, &Weight::One, None)
                .unwrap()
                .value
        };
        let both = s(vec![q1.clone(), q2.clone()]);
        assert!((both - s(vec![q1.clone()]) - s(vec![q2])).abs() < 1e-10 * both);
        // monotone under inclusion
        assert!(s(vec![q1.clone()]) <= both);
    }

    #[test]
    fn subgraph_sets_need_a_window() {
        let m = BernsteinModel::stable(1.0);
        let set = RegionSet::PowerLaw { gamma: 2.0 };
        assert!(sigma_v(&h3(), &m, &set, &Weight::One, None).is_err());
        let w = Window::new(vec![-0.25, -0.25, 0.0], vec![0.25, 0.25, 0.25]);
        // ∫₀ t^{-1} dt diverges, so σ₁ of a set resting on the boundary is infinite
        let e = sigma_v(&h3(), &m, &set, &Weight::One, Some(&w)).unwrap();
        assert!(e.value.is_infinite());
        let m = BernsteinModel::stable(0.5);
        let e = sigma_v(&h3(), &m, &set, &Weight::One, Some(&w)).unwrap();
        // ∫_{|x̃| box} ∫₀^{ρ²} t^{-1/2} dt = ∫ 2ρ dx̃ over [-1/4, 1/4]²
        let oracle = {
            let f = |u: f64| {
                integrate(|v: f64| 2.0 * (u * u + v * v).sqrt(), -0.25, 0.25, Tolerance::new(1e-14, 1e-12))
                    .unwrap()
                    .value
            };
            integrate(f, -0.25, 0.25, Tolerance::new(1e-14, 1e-12)).unwrap().value
        };
        assert!((e.value - oracle).abs() < 1e-6 * oracle, "{} {oracle}", e.value);
    }

    #[test]
    fn cube_energy_examples() {
        let m = BernsteinModel::stable(1.0);
        let dec = whitney_decompose(&h3(), &Window::new(vec![0.0, 0.0, 0.0], vec![4.0, 4.0, 4.0]), 3).unwrap();
        for q in dec.interior_cubes().take(20) {
            let e = cube_energy(&h3(), &m, q, &CubeSubset::Full, &Weight::One).unwrap();
            let mid = q.volume() * m.phi_unchecked(q.dist.powi(-2));
            let r = e.energy.value / mid;
            assert!((0.25..=4.0).contains(&r), "{r}");
            let empty = cube_energy(&h3(), &m, q, &CubeSubset::Empty, &Weight::One).unwrap();
            assert_eq!(empty.energy.value, 0.0);
        }
        let q = &dec.cubes[0];
        let bad = CubeSubset::SubBox {
            lo: vec![-1.0, 0.0, 0.0],
            hi: vec![0.0, 0.0, 0.0],
        };
        assert!(cube_energy(&h3(), &m, q, &bad, &Weight::One).is_err());
    }

    #[test]
    fn green_weight_tracks_center_value() {
        let m = BernsteinModel::stable(1.0);
        let v = Weight::GreenCapped { x0: vec![0.0, 0.0, 0.5] };
        let q = unit_cube([3.0, 0.0, 1.0], 0.25);
        let e = cube_energy(&h3(), &m, &q, &CubeSubset::Full, &v).unwrap();
        let ratio = e.energy.value / e.sigma_one;
        let w2 = e.weight_at_center * e.weight_at_center;
        assert!(ratio / w2 < 10.0 && w2 / ratio < 10.0);
    }

    #[test]
    fn quasi_additivity_examples() {
        let m = BernsteinModel::stable(1.0);
        let h = h3();
        let dec = whitney_decompose(&h, &Window::new(vec![-2.0, -2.0, 0.0], vec![2.0, 2.0, 4.0]), 4).unwrap();
        let picks: Vec<WhitneyCube> = dec
            .interior_cubes()
            .filter(|c| c.generation >= 2)
            .step_by(7)
            .take(10)
            .cloned()
            .collect();
        assert_eq!(picks.len(), 10);
        let z = [0.0, 0.0, 0.0];
        let one = RegionSet::CubeUnion { cubes: picks[..1].to_vec() };
        let r = quasi_additivity_report(&h, &m, &dec, &one, &z, 8.0, &Weight::One).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
        let ten = RegionSet::CubeUnion { cubes: picks.clone() };
        let r = quasi_additivity_report(&h, &m, &dec, &ten, &z, 8.0, &Weight::One).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-10);
        let v = Weight::GreenCapped { x0: vec![0.0, 0.0, 0.5] };
        let r = quasi_additivity_report(&h, &m, &dec, &ten, &z, 8.0, &v).unwrap();
        assert!(r.ratio > 0.1 && r.ratio < 10.0, "{r:?}");
    }

    #[test]
    fn capacity_shape_tracks_sigma_on_whitney_cubes() {
        let m = BernsteinModel::stable(1.0);
        let dec = whitney_decompose(&h3(), &Window::new(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]), 4).unwrap();
        let mut ratios = Vec::new();
        for q in dec.interior_cubes().filter(|c| (1..=3).contains(&c.generation)) {
            let s = box_sigma(&h3(), &m, &q.corner, &q.upper(), &Weight::One, &CubatureSettings::default())
                .unwrap()
                .0;
            ratios.push(ball_capacity_shape(&m, 0.5 * q.side, 3).unwrap() / s);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi / lo < 10.0, "{lo} {hi}");
    }
}
