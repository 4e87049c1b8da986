//! Minimal-thinness criteria and the decision procedures built on them.
//!
//! Each test turns a set `E` into a series over the dyadic annuli
//! `E_n = E ∩ {2^{-n-1} ≤ |x - z| < 2^{-n}}` and classifies its convergence.
//! Sets given by a profile are classified from the exact term density (see
//! [`classify_density`]); unions of Whitney cubes from their finite term
//! list (see [`classify_terms`]).

mod classify;
mod density;
mod scan;

pub use classify::{
    classify_density, classify_sequence, classify_terms, Classification, ClassifierSettings, TailFit, TailModel,
    Verdict, ANNULUS_UNIT,
};
pub use density::ln_wiener_weight;
pub use scan::{threshold_scan, threshold_scan_with, ScanFamily, ScanRow, ScanSettings, ScanTable};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bernstein::BernsteinModel;
use crate::capacity::{box_sigma, tensor_rule, weight_value, CubatureSettings, Weight};
use crate::error::{invalid, Error, Result};
use crate::geometry::{box_distance_range, Domain, Profile, RegionSet, WhitneyCube};
use crate::kernels::KernelSettings;
use crate::math::{dist, LogLinear};
use crate::quad::Tolerance;
use density::{
    annulus_integral, green_boundary_slope, opening_angle, section_point, shell_density, shell_density_weighted,
    subgraph_density,
};

/// The three processes compared by the criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Process {
    /// Subordinate killed Brownian motion `Y^D`.
    Skbm,
    /// Killed symmetric stable process `X^D`.
    KilledStable,
    /// Censored stable process `Z^D`.
    Censored,
}

/// A minimal-thinness criterion with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Criterion {
    /// `∫_E δ² φ(δ^{-2}) φ′(r^{-2}) / (r^{d+4} φ(r^{-2})²) dx`.
    SkbmIntegral { model: BernsteinModel },
    /// `Σ 2^{n(d+4)} φ′(2^{2n}) φ(2^{2n})^{-2} σ_v(E_n)`.
    SkbmWiener { model: BernsteinModel },
    /// Per-cube sum over a Whitney union.
    SkbmAikawa { model: BernsteinModel },
    /// `∫_E r^{-d} dx`.
    KilledStableIntegral { alpha: f64 },
    /// `∫_E δ^{α-2} r^{-(d+α-2)} dx`.
    CensoredIntegral { alpha: f64 },
    /// `∫ f³ φ(f^{-2}) φ′(ρ^{-2}) / (ρ^{d+4} φ(ρ^{-2})²) dx̃`.
    SubgraphSkbm { model: BernsteinModel },
    /// `∫ f^{α-1} ρ^{-(d+α-2)} dx̃`.
    SubgraphCensored { alpha: f64 },
    /// `∫ f ρ^{-d} dx̃`.
    SubgraphKilledStable { alpha: f64 },
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::SkbmIntegral { .. } => "skbm_integral",
            Criterion::SkbmWiener { .. } => "skbm_wiener",
            Criterion::SkbmAikawa { .. } => "skbm_aikawa",
            Criterion::KilledStableIntegral { .. } => "killed_stable_integral",
            Criterion::CensoredIntegral { .. } => "censored_integral",
            Criterion::SubgraphSkbm { .. } => "subgraph_skbm",
            Criterion::SubgraphCensored { .. } => "subgraph_censored",
            Criterion::SubgraphKilledStable { .. } => "subgraph_killed_stable",
        }
    }

    pub fn process(&self) -> Process {
        match self {
            Criterion::SkbmIntegral { .. }
            | Criterion::SkbmWiener { .. }
            | Criterion::SkbmAikawa { .. }
            | Criterion::SubgraphSkbm { .. } => Process::Skbm,
            Criterion::KilledStableIntegral { .. } | Criterion::SubgraphKilledStable { .. } => Process::KilledStable,
            Criterion::CensoredIntegral { .. } | Criterion::SubgraphCensored { .. } => Process::Censored,
        }
    }

    pub fn is_subgraph(&self) -> bool {
        matches!(
            self,
            Criterion::SubgraphSkbm { .. } | Criterion::SubgraphCensored { .. } | Criterion::SubgraphKilledStable { .. }
        )
    }

    pub fn model(&self) -> Option<BernsteinModel> {
        match *self {
            Criterion::SkbmIntegral { model }
            | Criterion::SkbmWiener { model }
            | Criterion::SkbmAikawa { model }
            | Criterion::SubgraphSkbm { model } => Some(model),
            _ => None,
        }
    }

    /// `α` of the stable-type criteria, or of a stable SKBM model.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Criterion::KilledStableIntegral { alpha }
            | Criterion::CensoredIntegral { alpha }
            | Criterion::SubgraphCensored { alpha }
            | Criterion::SubgraphKilledStable { alpha } => Some(alpha),
            _ => self.model().map(|m| m.alpha()),
        }
    }

    /// The criteria for the three processes at a stable index `α`:
    /// `(Z, X, Y)`, with `Z` absent unless `α ∈ (1, 2)`.
    pub fn stable_family(alpha: f64, subgraph: bool) -> (Option<Criterion>, Criterion, Criterion) {
        let model = BernsteinModel::stable(alpha);
        let z_ok = alpha > 1.0 && alpha < 2.0;
        if subgraph {
            (
                z_ok.then_some(Criterion::SubgraphCensored { alpha }),
                Criterion::SubgraphKilledStable { alpha },
                Criterion::SubgraphSkbm { model },
            )
        } else {
            (
                z_ok.then_some(Criterion::CensoredIntegral { alpha }),
                Criterion::KilledStableIntegral { alpha },
                Criterion::SkbmIntegral { model },
            )
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        density::check_dim(d)?;
        if let Some(m) = self.model() {
            m.validate()?;
        }
        match *self {
            Criterion::CensoredIntegral { alpha } | Criterion::SubgraphCensored { alpha } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return Err(invalid(format!("censored criteria require α in (1,2), got {alpha}")));
                }
            }
            Criterion::KilledStableIntegral { alpha } | Criterion::SubgraphKilledStable { alpha } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(invalid(format!("killed stable criteria require α in (0,2), got {alpha}")));
                }
            }
            Criterion::SubgraphSkbm { .. } if d < 3 => {
                return Err(invalid(format!("the subgraph SKBM criterion requires d ≥ 3, got {d}")));
            }
            _ => {}
        }
        Ok(())
    }
}

/// How far a verdict is backed by the criterion used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Sufficiency {
    /// The criterion characterizes thinness for this kind of set.
    Equivalence,
    /// The integral diverges; the set is genuinely not minimally thin.
    NecessaryConditionViolation,
    /// The integral converges, but the converse is only known for unions of
    /// Whitney cubes.
    IntegralTestThin,
    /// No decisive verdict.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum ClassifierMode {
    /// Tail read from the exact term density.
    Density,
    /// Tail fitted to the finite term list.
    FiniteTerms,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThinnessReport {
    pub criterion: Criterion,
    pub set: String,
    pub verdict: Verdict,
    /// `a_n` for `n = 1..=N`.
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    pub fit: TailFit,
    pub mode: ClassifierMode,
    pub sufficiency: Sufficiency,
    /// Set to `"sigma_v"` where a capacity is replaced by `σ_v`.
    pub capacity_substitute: Option<String>,
}

impl ThinnessReport {
    fn new(criterion: Criterion, set: &RegionSet, terms: Vec<f64>, c: Classification, mode: ClassifierMode) -> Self {
        let partial_sum = terms.iter().sum();
        let sufficiency = if c.verdict.is_decisive() {
            Sufficiency::Equivalence
        } else {
            Sufficiency::Undecided
        };
        ThinnessReport {
            criterion,
            set: set.name().into(),
            verdict: c.verdict,
            terms,
            partial_sum,
            fit: c.fit,
            mode,
            sufficiency,
            capacity_substitute: None,
        }
    }
}

/// Maps a term function over annulus indices; the std crate supplies a
/// parallel implementation.
pub trait TermMap {
    fn map_terms(&self, ns: &[u32], f: &(dyn Fn(u32) -> Result<f64> + Sync)) -> Vec<Result<f64>>;
}

/// In-order evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TermMap for Sequential {
    fn map_terms(&self, ns: &[u32], f: &(dyn Fn(u32) -> Result<f64> + Sync)) -> Vec<Result<f64>> {
        ns.iter().map(|n| f(*n)).collect()
    }
}

fn collect_terms(exec: &dyn TermMap, n_max: u32, f: &(dyn Fn(u32) -> Result<f64> + Sync)) -> Result<Vec<f64>> {
    let ns: Vec<u32> = (1..=n_max).collect();
    exec.map_terms(&ns, f).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinnessSettings {
    pub classifier: ClassifierSettings,
    /// Targets of the per-annulus integrals.
    pub term_tol: Tolerance,
    /// Targets of the inner angular integrals.
    pub inner_tol: Tolerance,
    /// Green-function targets for the Wiener weight.
    pub kernel: KernelSettings,
    /// Bisection depth of cubes straddling an annulus boundary.
    pub clip_depth: u32,
    /// Gauss–Legendre nodes per axis on each cube piece.
    pub cube_nodes: usize,
    /// Below this `|x - z|` the Wiener weight uses its boundary slope.
    pub taylor_radius: f64,
}

impl Default for ThinnessSettings {
    fn default() -> Self {
        ThinnessSettings {
            classifier: ClassifierSettings::default(),
            term_tol: Tolerance::new(0.0, 1e-7),
            inner_tol: Tolerance::new(0.0, 1e-10),
            kernel: KernelSettings {
                tol: Tolerance::new(1e-12, 1e-7),
                ..KernelSettings::default()
            },
            clip_depth: 3,
            cube_nodes: 3,
            taylor_radius: 1e-3,
        }
    }
}

/// Default number of annuli in reports.
pub const DEFAULT_N_MAX: u32 = 36;

fn check_anchor(domain: &Domain, set: &RegionSet, z: &[f64]) -> Result<()> {
    domain.validate()?;
    set.validate(domain, z)?;
    domain.inward_normal(z)?;
    Ok(())
}

fn empty_report(criterion: Criterion, set: &RegionSet, n_max: u32) -> ThinnessReport {
    let c = Classification {
        verdict: Verdict::Thin,
        fit: TailFit {
            model: TailModel::Vanishing,
            rho: f64::NAN,
            p: None,
            q: None,
            q2: None,
            residual: 0.0,
        },
    };
    ThinnessReport::new(criterion, set, vec![0.0; n_max as usize], c, ClassifierMode::Density)
}

/// `∫_{lo + [0, side]^d ∩ annulus} f` with cubes straddling the annulus
/// bisected `depth` times.
#[allow(clippy::too_many_arguments)]
fn clipped_integral<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    side: f64,
    z: &[f64],
    r_lo: f64,
    r_hi: f64,
    depth: u32,
    nodes: usize,
) -> f64 {
    let (near, far) = box_distance_range(lo, side, z);
    if near >= r_hi || far < r_lo {
        return 0.0;
    }
    let hi: Vec<f64> = lo.iter().map(|v| v + side).collect();
    if near >= r_lo && far < r_hi {
        return tensor_rule(&|x: &[f64]| Ok(f(x)), lo, &hi, nodes).unwrap_or(f64::NAN);
    }
    if depth == 0 {
        let masked = |x: &[f64]| {
            let r = dist(x, z);
            Ok(if r >= r_lo && r < r_hi { f(x) } else { 0.0 })
        };
        return tensor_rule(&masked, lo, &hi, nodes).unwrap_or(f64::NAN);
    }
    let d = lo.len();
    let half = 0.5 * side;
    let mut total = 0.0;
    for mask in 0..(1usize << d) {
        let child: Vec<f64> = lo
            .iter()
            .enumerate()
            .map(|(i, v)| v + if mask >> i & 1 == 1 { half } else { 0.0 })
            .collect();
        total += clipped_integral(f, &child, half, z, r_lo, r_hi, depth - 1, nodes);
    }
    total
}

fn cube_terms<F: Fn(&[f64]) -> f64 + Sync>(
    cubes: &[WhitneyCube],
    weights: Option<&[f64]>,
    z: &[f64],
    n_max: u32,
    settings: &ThinnessSettings,
    exec: &dyn TermMap,
    f: F,
) -> Result<Vec<f64>> {
    let term = |n: u32| -> Result<f64> {
        let r_hi = (-(n as f64)).exp2();
        let r_lo = 0.5 * r_hi;
        let mut total = 0.0;
        for (j, c) in cubes.iter().enumerate() {
            let v = clipped_integral(&f, &c.corner, c.side, z, r_lo, r_hi, settings.clip_depth, settings.cube_nodes);
            let w = weights.map_or(1.0, |w| w[j]);
            total += w * v;
        }
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite term at annulus {n}")));
        }
        Ok(total)
    };
    collect_terms(exec, n_max, &term)
}

fn density_report<A>(criterion: Criterion, set: &RegionSet, terms: Vec<f64>, ln_a: A, st: &ThinnessSettings) -> Result<ThinnessReport>
where
    A: FnMut(f64) -> Result<LogLinear>,
{
    let c = classify_density(ln_a, ANNULUS_UNIT, &st.classifier)?;
    Ok(ThinnessReport::new(criterion, set, terms, c, ClassifierMode::Density))
}

fn finite_report(criterion: Criterion, set: &RegionSet, terms: Vec<f64>, st: &ThinnessSettings) -> Result<ThinnessReport> {
    let c = classify_terms(&terms, &st.classifier)?;
    Ok(ThinnessReport::new(criterion, set, terms, c, ClassifierMode::FiniteTerms))
}

/// The `d`-dimensional integral criteria over the dyadic annuli of `E`.
pub fn integral_test(
    domain: &Domain,
    criterion: &Criterion,
    set: &RegionSet,
    z: &[f64],
    n_max: u32,
) -> Result<ThinnessReport> {
    integral_test_with(domain, criterion, set, z, n_max, &ThinnessSettings::default(), &Sequential)
}

pub fn integral_test_with(
    domain: &Domain,
    criterion: &Criterion,
    set: &RegionSet,
    z: &[f64],
    n_max: u32,
    st: &ThinnessSettings,
    exec: &dyn TermMap,
) -> Result<ThinnessReport> {
    let d = domain.dim();
    criterion.validate(d)?;
    if !matches!(
        criterion,
        Criterion::SkbmIntegral { .. } | Criterion::KilledStableIntegral { .. } | Criterion::CensoredIntegral { .. }
    ) {
        return Err(invalid(format!("{} is not an integral criterion", criterion.name())));
    }
    if n_max < 8 {
        return Err(invalid(format!("n_max = {n_max} is too few annuli to classify")));
    }
    check_anchor(domain, set, z)?;
    if criterion.process() == Process::Skbm {
        domain.require_transient_dimension()?;
    }
    let c = *criterion;
    match set {
        RegionSet::Empty => Ok(empty_report(c, set, n_max)),
        RegionSet::CubeUnion { cubes } => {
            let g = |x: &[f64]| match domain.distance(x) {
                Ok(dd) => c.integrand(dd.value, dist(x, z), d),
                Err(_) => 0.0,
            };
            let terms = cube_terms(cubes, None, z, n_max, st, exec, g)?;
            finite_report(c, set, terms, st)
        }
        _ => {
            let profile = set.profile().expect("profile sets");
            let tol = st.inner_tol;
            let ln_a = |s: f64| shell_density(&c, &profile, d, s, tol);
            let terms = collect_terms(exec, n_max, &|n| annulus_integral(ln_a, n, st.term_tol))?;
            let mut report = density_report(c, set, terms, ln_a, st)?;
            report.sufficiency = match report.verdict {
                Verdict::Thin => Sufficiency::IntegralTestThin,
                Verdict::NotThin => Sufficiency::NecessaryConditionViolation,
                Verdict::Inconclusive => Sufficiency::Undecided,
            };
            Ok(report)
        }
    }
}

/// The `(d-1)`-dimensional criterion for the subgraph of `profile` in the
/// half-space `R^d`, anchored at the origin.
pub fn subgraph_test(profile: &Profile, criterion: &Criterion, d: usize, n_max: u32) -> Result<ThinnessReport> {
    subgraph_test_with(profile, criterion, d, n_max, &ThinnessSettings::default(), &Sequential)
}

pub fn subgraph_test_with(
    profile: &Profile,
    criterion: &Criterion,
    d: usize,
    n_max: u32,
    st: &ThinnessSettings,
    exec: &dyn TermMap,
) -> Result<ThinnessReport> {
    criterion.validate(d)?;
    if !criterion.is_subgraph() {
        return Err(invalid(format!("{} is not a subgraph criterion", criterion.name())));
    }
    if n_max < 8 {
        return Err(invalid(format!("n_max = {n_max} is too few annuli to classify")));
    }
    profile.validate()?;
    let lip = profile.sampled_lipschitz();
    if !(lip.is_finite() && lip < 1e6) {
        return Err(Error::Geometry(format!("profile is not Lipschitz (sampled slope {lip})")));
    }
    let c = *criterion;
    let set = RegionSet::Subgraph { profile: *profile };
    let ln_a = |s: f64| Ok(subgraph_density(&c, profile, d, s));
    let terms = collect_terms(exec, n_max, &|n| annulus_integral(ln_a, n, st.term_tol))?;
    density_report(c, &set, terms, ln_a, st)
}

/// Default reference point `x₀ = z + e_d / 2` of the Wiener weight.
pub fn default_reference_point(z: &[f64]) -> Vec<f64> {
    let mut x0 = z.to_vec();
    let d = x0.len();
    x0[d - 1] += 0.5;
    x0
}

/// Radius `R` of the reference-point geometry: `R/4 < δ(x₀) < R`.
pub const REFERENCE_RADIUS: f64 = 1.0;

/// The Wiener-type series `Σ w(n) σ_v(E_n)` with `v = min(U^D(·, x₀), 1)`.
pub fn wiener_series(
    domain: &Domain,
    model: &BernsteinModel,
    set: &RegionSet,
    z: &[f64],
    v: &Weight,
    n_max: u32,
) -> Result<ThinnessReport> {
    wiener_series_with(domain, model, set, z, v, n_max, &ThinnessSettings::default(), &Sequential)
}

#[allow(clippy::too_many_arguments)]
pub fn wiener_series_with(
    domain: &Domain,
    model: &BernsteinModel,
    set: &RegionSet,
    z: &[f64],
    v: &Weight,
    n_max: u32,
    st: &ThinnessSettings,
    exec: &dyn TermMap,
) -> Result<ThinnessReport> {
    let d = domain.dim();
    let criterion = Criterion::SkbmWiener { model: *model };
    criterion.validate(d)?;
    if n_max < 8 {
        return Err(invalid(format!("n_max = {n_max} is too few annuli to classify")));
    }
    if !matches!(domain, Domain::HalfSpace { .. }) {
        return Err(Error::Unsupported("the Wiener series is implemented for the half-space".into()));
    }
    domain.require_transient_dimension()?;
    check_anchor(domain, set, z)?;
    let x0 = match v {
        Weight::GreenCapped { x0 } => x0.clone(),
        Weight::One => return Err(invalid("the Wiener series needs the Green weight v = min(U(·, x₀), 1)")),
    };
    let h = domain.distance(&x0)?.value;
    if !(h > REFERENCE_RADIUS / 4.0 && h < REFERENCE_RADIUS) {
        return Err(Error::Geometry(format!(
            "reference point needs {} < δ(x₀) < {}, got {h}",
            REFERENCE_RADIUS / 4.0,
            REFERENCE_RADIUS
        )));
    }
    let ln_w = |n: u32| ln_wiener_weight(model, n, d);
    let mut report = match set {
        RegionSet::Empty => empty_report(criterion, set, n_max),
        RegionSet::CubeUnion { cubes } => {
            let mut weights = Vec::with_capacity(cubes.len());
            for c in cubes {
                let w = weight_value(domain, model, v, &c.center(), &st.kernel)?;
                weights.push(w * w);
            }
            let phi = |x: &[f64]| model.phi_unchecked(x[d - 1].powi(-2));
            let sig = cube_terms(cubes, Some(&weights), z, n_max, st, exec, phi)?;
            let terms = sig
                .iter()
                .enumerate()
                .map(|(i, s)| s * ln_w(i as u32 + 1).exp())
                .collect();
            finite_report(criterion, set, terms, st)?
        }
        _ => {
            if x0[..d - 1].iter().zip(&z[..d - 1]).any(|(a, b)| a != b) {
                return Err(Error::Unsupported(
                    "for subgraph sets the reference point must lie on the axis through z".into(),
                ));
            }
            let profile = set.profile().expect("profile sets");
            let k0 = green_boundary_slope(model, d, h, st.kernel.tol)?;
            let skbm = Criterion::SkbmIntegral { model: *model };
            let tol = st.inner_tol;
            // σ_v density: the SKBM shell density with δ² replaced by v²,
            // divided by the radial factor φ′(r^{-2}) / (r^{d+4} φ(r^{-2})²)
            let radial = |s: f64| {
                let l = 2.0 * s;
                model.ln_phi_prime(l) + (d as f64 + 4.0) * s - 2.0 * model.ln_phi(l)
            };
            let term = |n: u32| -> Result<f64> {
                let sigma = annulus_integral(
                    |s: f64| {
                        let r = (-s).exp();
                        let psi = if r < st.taylor_radius { 0.0 } else { opening_angle(&profile, s)? };
                        let mut err = None;
                        let a = shell_density_weighted(&skbm, &profile, d, s, tol, |t| {
                            if r < st.taylor_radius {
                                return k0 * k0;
                            }
                            let x = section_point(d, r, psi * t);
                            let delta = x[d - 1];
                            match weight_value(domain, model, v, &x, &st.kernel) {
                                Ok(w) => (w / delta).powi(2),
                                Err(e) => {
                                    err.get_or_insert(e);
                                    0.0
                                }
                            }
                        })?;
                        if let Some(e) = err {
                            return Err(e);
                        }
                        Ok(a - LogLinear::constant(radial(s)))
                    },
                    n,
                    st.term_tol,
                )?;
                Ok(sigma * ln_w(n).exp())
            };
            let terms = collect_terms(exec, n_max, &term)?;
            let ln_k0 = LogLinear::constant(2.0 * k0.ln());
            density_report(
                criterion,
                set,
                terms,
                |s| Ok(shell_density(&skbm, &profile, d, s, tol)? + ln_k0),
                st,
            )?
        }
    };
    report.capacity_substitute = Some("sigma_v".into());
    Ok(report)
}

/// The per-cube sum over a Whitney union, with `Cap_D(E ∩ Q_j)` replaced by
/// `σ₁(Q_j)` and cubes grouped into shells by `dist(z, Q_j)`.
pub fn aikawa_sum(domain: &Domain, model: &BernsteinModel, set: &RegionSet, z: &[f64], n_max: u32) -> Result<ThinnessReport> {
    aikawa_sum_with(domain, model, set, z, n_max, &ThinnessSettings::default())
}

pub fn aikawa_sum_with(
    domain: &Domain,
    model: &BernsteinModel,
    set: &RegionSet,
    z: &[f64],
    n_max: u32,
    st: &ThinnessSettings,
) -> Result<ThinnessReport> {
    let d = domain.dim();
    let criterion = Criterion::SkbmAikawa { model: *model };
    criterion.validate(d)?;
    if n_max < 8 {
        return Err(invalid(format!("n_max = {n_max} is too few annuli to classify")));
    }
    domain.require_transient_dimension()?;
    check_anchor(domain, set, z)?;
    let cubes = match set {
        RegionSet::Empty => return Ok(empty_report(criterion, set, n_max)),
        RegionSet::CubeUnion { cubes } => cubes,
        _ => return Err(invalid("the Aikawa sum needs a union of Whitney cubes")),
    };
    let cub = CubatureSettings {
        kernel: st.kernel,
        ..CubatureSettings::default()
    };
    let mut terms = vec![0.0; n_max as usize];
    for c in cubes {
        let (near, _) = box_distance_range(&c.corner, c.side, z);
        if !(near > 0.0) {
            return Err(Error::Geometry("a cube touches the anchor point".into()));
        }
        let n = ((-near.log2()).floor() as i64).max(1);
        if n > n_max as i64 {
            continue;
        }
        let (sigma, _) = box_sigma(domain, model, &c.corner, &c.upper(), &Weight::One, &cub)?;
        let l = -2.0 * near.ln();
        let ln_t = 2.0 * c.dist.ln() + model.ln_phi_prime(l) - (d as f64 + 4.0) * near.ln() - 2.0 * model.ln_phi(l);
        terms[n as usize - 1] += ln_t.exp() * sigma;
    }
    let mut report = finite_report(criterion, set, terms, st)?;
    report.capacity_substitute = Some("sigma_v".into());
    Ok(report)
}

/// Verdicts for the censored, killed stable and subordinate processes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProcessComparison {
    pub alpha: f64,
    /// Absent unless `α ∈ (1, 2)`.
    pub censored: Option<ThinnessReport>,
    pub killed_stable: ThinnessReport,
    pub skbm: ThinnessReport,
}

impl ProcessComparison {
    /// `(Z, X, Y)`.
    pub fn verdicts(&self) -> (Option<Verdict>, Verdict, Verdict) {
        (
            self.censored.as_ref().map(|r| r.verdict),
            self.killed_stable.verdict,
            self.skbm.verdict,
        )
    }
}

/// Run the three criteria at stable index `α` and check that thinness for
/// `Z^D` implies thinness for `X^D`, which implies thinness for `Y^D`.
pub fn compare_processes(domain: &Domain, set: &RegionSet, alpha: f64, z: &[f64], n_max: u32) -> Result<ProcessComparison> {
    compare_processes_with(domain, set, alpha, z, n_max, &ThinnessSettings::default(), &Sequential)
}

pub fn compare_processes_with(
    domain: &Domain,
    set: &RegionSet,
    alpha: f64,
    z: &[f64],
    n_max: u32,
    st: &ThinnessSettings,
    exec: &dyn TermMap,
) -> Result<ProcessComparison> {
    let d = domain.dim();
    let subgraph = set.profile().is_some();
    let (zc, xc, yc) = Criterion::stable_family(alpha, subgraph);
    let run = |c: &Criterion| -> Result<ThinnessReport> {
        if subgraph {
            check_anchor(domain, set, z)?;
            subgraph_test_with(&set.profile().expect("profile sets"), c, d, n_max, st, exec)
        } else {
            integral_test_with(domain, c, set, z, n_max, st, exec)
        }
    };
    let censored = zc.as_ref().map(run).transpose()?;
    let killed_stable = run(&xc)?;
    let skbm = run(&yc)?;
    let out = ProcessComparison {
        alpha,
        censored,
        killed_stable,
        skbm,
    };
    check_chain(&out.verdicts())?;
    Ok(out)
}

/// `Thin(Z) ⇒ Thin(X) ⇒ Thin(Y)` on decisive verdicts.
pub fn check_chain(v: &(Option<Verdict>, Verdict, Verdict)) -> Result<()> {
    let chain = [v.0, Some(v.1), Some(v.2)];
    for i in 0..3 {
        for j in i + 1..3 {
            if chain[i] == Some(Verdict::Thin) && chain[j] == Some(Verdict::NotThin) {
                let names = ["censored", "killed stable", "subordinate"];
                return Err(Error::Inconsistent(format!(
                    "thin for the {} process but not for the {} process",
                    names[i], names[j]
                )));
            }
        }
    }
    Ok(())
}

/// `∫₀ᵗ r² φ(r^{-2}) dr / (t³ φ(t^{-2}))`, which lies in `[1/3, 1]`.
pub fn observation_ratio(model: &BernsteinModel, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    model.validate()?;
    let num = crate::quad::integrate_log(
        |r| (2.0 * r.ln() + model.ln_phi(-2.0 * r.ln())).exp(),
        0.0,
        t,
        Tolerance::new(0.0, 1e-10),
    )?;
    Ok(num.value / (3.0 * t.ln() + model.ln_phi(-2.0 * t.ln())).exp())
}
