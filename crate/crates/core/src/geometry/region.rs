//! Sets `E ⊂ D` tested for minimal thinness, and their dyadic annuli.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::E;
#[allow(unused_imports)]
use num_traits::Float;

use super::{Domain, WhitneyCube};
use crate::error::{Error, Result};
use crate::math::{dist, LogLinear};

/// A radial profile `f(ρ)`, `ρ = |x̃|`, bounding `E = {0 < x_d ≤ f(x̃)}` in the
/// half-space near the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Profile {
    /// `f = scale · ρ^γ`, `γ ≥ 1`.
    Power { gamma: f64, scale: f64 },
    /// Level 1: `f = ρ L₁(1/ρ)^{-β}`. Level `n ≥ 2`:
    /// `f = ρ (L₂⋯L_n)(1/ρ)^{-1/3} L_{n+1}(1/ρ)^{-β}`, with iterated logarithms
    /// `L₁ = log`, `L_{k+1} = log L_k` clamped below at 1.
    LogCorrected { beta: f64, level: u32 },
    Zero,
}

impl Profile {
    pub fn power(gamma: f64) -> Self {
        Profile::Power { gamma, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Profile::Power { gamma, scale } => {
                if !(gamma >= 1.0 && gamma.is_finite()) {
                    return Err(Error::Geometry(format!("profile ρ^γ is not Lipschitz for γ = {gamma}")));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidArgument(format!("profile scale must be positive, got {scale}")));
                }
            }
            Profile::LogCorrected { beta, level } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(Error::Geometry(format!("log-corrected profile needs β ≥ 0, got {beta}")));
                }
                if !(1..=3).contains(&level) {
                    return Err(Error::InvalidArgument(format!("log-correction level must be 1..=3, got {level}")));
                }
            }
            Profile::Zero => {}
        }
        Ok(())
    }

    /// `ln f(ρ)` with `-ln ρ = s + extra`, in split form at scale `s`.
    pub fn ln_value(&self, s: f64, extra: f64) -> LogLinear {
        let big_s = s + extra;
        let ln_big_s = || s.ln() + (extra / s).ln_1p();
        match *self {
            Profile::Power { gamma, scale } => LogLinear::new(-gamma, scale.ln() - gamma * extra),
            Profile::LogCorrected { beta, level } => {
                if big_s <= 0.0 {
                    return LogLinear::NEG_INFINITY;
                }
                if level == 1 {
                    return LogLinear::new(-1.0, -extra - beta * ln_big_s());
                }
                // iterated logs L₂, …, L_{n+1}, each at least 1
                let mut rest = -extra;
                let mut lk = ln_big_s().max(1.0);
                for k in 2..=level + 1 {
                    if k <= level {
                        rest -= lk.ln() / 3.0;
                    } else {
                        rest -= beta * lk.ln();
                    }
                    lk = lk.max(E).ln();
                }
                LogLinear::new(-1.0, rest)
            }
            Profile::Zero => LogLinear::NEG_INFINITY,
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let s = -rho.ln();
        if s <= 0.0 {
            return match *self {
                Profile::Power { gamma, scale } => scale * rho.powf(gamma),
                _ => 0.0,
            };
        }
        self.ln_value(s, 0.0).eval(s).exp()
    }

    /// Largest slope `|f(u) - f(v)| / |u - v|` over neighbouring points of a
    /// log grid on `(0, 1/2]`.
    pub fn sampled_lipschitz(&self) -> f64 {
        let pts = crate::math::logspace(1e-12, 0.5, 2000);
        pts.windows(2)
            .map(|w| (self.value(w[1]) - self.value(w[0])).abs() / (w[1] - w[0]))
            .fold(0.0, f64::max)
    }
}

/// A set tested for minimal thinness at a boundary point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum RegionSet {
    Empty,
    /// Union of Whitney cubes.
    CubeUnion { cubes: Vec<WhitneyCube> },
    /// `{0 < x_d ≤ f(x̃)}` in the half-space, anchored at the origin.
    Subgraph { profile: Profile },
    /// `{0 < x_d ≤ |x̃|^γ}`.
    PowerLaw { gamma: f64 },
    /// Subgraph of [`Profile::LogCorrected`].
    LogCorrected { beta: f64, level: u32 },
}

/// The part of a set inside `2^{-n-1} ≤ |x - z| < 2^{-n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusPiece {
    pub n: u32,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Indices of cubes meeting the annulus, for cube unions.
    pub cubes: Vec<usize>,
    /// The bounding profile, for subgraph sets.
    pub profile: Option<Profile>,
}

impl RegionSet {
    pub fn name(&self) -> &'static str {
        match self {
            RegionSet::Empty => "empty",
            RegionSet::CubeUnion { .. } => "cube_union",
            RegionSet::Subgraph { .. } => "subgraph",
            RegionSet::PowerLaw { .. } => "power_law",
            RegionSet::LogCorrected { .. } => "log_corrected",
        }
    }

    /// The bounding profile of subgraph-type sets.
    pub fn profile(&self) -> Option<Profile> {
        match *self {
            RegionSet::Subgraph { profile } => Some(profile),
            RegionSet::PowerLaw { gamma } => Some(Profile::power(gamma)),
            RegionSet::LogCorrected { beta, level } => Some(Profile::LogCorrected { beta, level }),
            _ => None,
        }
    }

    pub fn validate(&self, domain: &Domain, z: &[f64]) -> Result<()> {
        if z.len() != domain.dim() {
            return Err(Error::InvalidArgument(format!(
                "anchor has {} coordinates, domain has dimension {}",
                z.len(),
                domain.dim()
            )));
        }
        if let Some(p) = self.profile() {
            p.validate()?;
            if !matches!(domain, Domain::HalfSpace { .. }) {
                return Err(Error::Unsupported("subgraph sets live in the half-space".into()));
            }
            if z.iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidArgument("subgraph sets are anchored at the origin".into()));
            }
        }
        if let RegionSet::CubeUnion { cubes } = self {
            if cubes.iter().any(|c| c.corner.len() != domain.dim()) {
                return Err(Error::InvalidArgument("cube dimension mismatch".into()));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RegionSet::Empty => false,
            RegionSet::CubeUnion { cubes } => cubes.iter().any(|c| {
                c.corner
                    .iter()
                    .zip(x)
                    .all(|(a, v)| *a <= *v && *v < a + c.side)
            }),
            _ => {
                let d = x.len();
                let rho = x[..d - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                let f = self.profile().map_or(0.0, |p| p.value(rho));
                x[d - 1] > 0.0 && x[d - 1] <= f
            }
        }
    }

    /// The pieces `E_n`, `n = 1..=n_max`.
    pub fn annulus_split(&self, z: &[f64], n_max: u32) -> Result<Vec<AnnulusPiece>> {
        if n_max < 1 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        let mut out = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let r_hi = (-(n as f64)).exp2();
            let r_lo = 0.5 * r_hi;
            let cubes = match self {
                RegionSet::CubeUnion { cubes } => cubes
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| {
                        let (near, far) = box_distance_range(&c.corner, c.side, z);
                        near < r_hi && far > r_lo
                    })
                    .map(|(i, _)| i)
                    .collect(),
                _ => Vec::new(),
            };
            out.push(AnnulusPiece {
                n,
                r_lo,
                r_hi,
                cubes,
                profile: self.profile(),
            });
        }
        Ok(out)
    }
}

impl RegionSet {
    /// Whitney cubes of the half-space whose centres lie in the subgraph of
    /// `profile` within distance 1/2 of the origin, pruned to cubes of side
    /// at least `eta` times the distance of their centre.
    ///
    /// Annuli `1..=n_max` are fully resolved.
    pub fn tracking(profile: &Profile, d: usize, n_max: u32, eta: f64) -> Result<RegionSet> {
        profile.validate()?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidArgument(format!("pruning ratio must lie in (0, 1], got {eta}")));
        }
        let domain = Domain::half_space(d);
        domain.validate()?;
        let extra = (1.0 / eta).log2().ceil() as u32;
        let max_generation = n_max + 2 + extra;
        if max_generation > super::whitney::MAX_GENERATION {
            return Err(Error::InvalidArgument(format!(
                "n_max = {n_max} with pruning ratio {eta} needs generation {max_generation}"
            )));
        }
        let mut lo = alloc::vec![-1.0; d];
        lo[d - 1] = 0.0;
        let window = super::Window::cube(&lo, 2.0);
        let origin = alloc::vec![0.0; d];
        let keep = |lo: &[f64], hi: &[f64]| {
            let side = hi[0] - lo[0];
            let (near, _) = box_distance_range(lo, side, &origin);
            if near >= 0.5 || side < eta * near {
                return false;
            }
            let rho = lo[..d - 1]
                .iter()
                .zip(&hi[..d - 1])
                .map(|(a, b)| a.abs().max(b.abs()).powi(2))
                .sum::<f64>()
                .sqrt()
                .min(0.5);
            lo[d - 1] < profile.value(rho)
        };
        let dec = super::whitney_decompose_filtered(&domain, &window, max_generation, keep)?;
        let set = RegionSet::Subgraph { profile: *profile };
        let cubes = dec
            .cubes
            .into_iter()
            .filter(|c| {
                let x = c.center();
                let r = crate::math::norm(&x);
                r < 0.5 && c.side >= eta * r && set.contains(&x)
            })
            .collect();
        Ok(RegionSet::CubeUnion { cubes })
    }
}

/// Nearest and farthest distance from `z` to the closed cube.
pub fn box_distance_range(corner: &[f64], side: f64, z: &[f64]) -> (f64, f64) {
    let mut near = 0.0;
    let mut far = 0.0;
    for (c, zi) in corner.iter().zip(z) {
        let (a, b) = (c - zi, c + side - zi);
        let n = if a > 0.0 {
            a
        } else if b < 0.0 {
            -b
        } else {
            0.0
        };
        let f = a.abs().max(b.abs());
        near += n * n;
        far += f * f;
    }
    (near.sqrt(), far.sqrt())
}

/// Volume of `cube ∩ {r_lo ≤ |x - z| < r_hi}` by recursive bisection down to
/// `depth` levels; undecided leaves are classified by their centre.
pub fn clipped_volume(cube: &WhitneyCube, z: &[f64], r_lo: f64, r_hi: f64, depth: u32) -> f64 {
    fn go(corner: &[f64], side: f64, z: &[f64], r_lo: f64, r_hi: f64, depth: u32) -> f64 {
        let d = corner.len();
        let (near, far) = box_distance_range(corner, side, z);
        let vol = side.powi(d as i32);
        if near >= r_lo && far < r_hi {
            return vol;
        }
        if far < r_lo || near >= r_hi {
            return 0.0;
        }
        if depth == 0 {
            let c: Vec<f64> = corner.iter().map(|v| v + 0.5 * side).collect();
            let r = dist(&c, z);
            return if r >= r_lo && r < r_hi { vol } else { 0.0 };
        }
        let half = 0.5 * side;
        let mut total = 0.0;
        for mask in 0..(1usize << d) {
            let child: Vec<f64> = corner
                .iter()
                .enumerate()
                .map(|(i, v)| v + if mask >> i & 1 == 1 { half } else { 0.0 })
                .collect();
            total += go(&child, half, z, r_lo, r_hi, depth - 1);
        }
        total
    }
    go(&cube.corner, cube.side, z, r_lo, r_hi, depth)
}
