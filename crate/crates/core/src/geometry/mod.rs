//! Domains, boundary distance, Whitney cubes and the sets tested for thinness.

mod region;
mod whitney;

pub use region::{box_distance_range, clipped_volume, AnnulusPiece, Profile, RegionSet};
pub use whitney::{
    whitney_decompose, whitney_decompose_filtered, Window, WhitneyCube, WhitneyDecomposition, MAX_GENERATION,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::math::norm;

/// A bounded `C^{1,1}` height function `h(x̃)` bounding an [`Domain::AboveGraph`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum GraphProfile {
    /// `h ≡ value`.
    Constant { value: f64 },
    /// `h = amplitude · cos(2π x̃₁ / wavelength)`.
    Cosine { amplitude: f64, wavelength: f64 },
    /// `h = amplitude · (1 - |x̃|²/width²)²` inside `|x̃| < width`, zero outside.
    Bump { amplitude: f64, width: f64 },
}

impl GraphProfile {
    pub fn height(&self, xt: &[f64]) -> f64 {
        match *self {
            GraphProfile::Constant { value } => value,
            GraphProfile::Cosine {
                amplitude,
                wavelength,
            } => amplitude * (2.0 * PI * xt.first().copied().unwrap_or(0.0) / wavelength).cos(),
            GraphProfile::Bump { amplitude, width } => {
                let q = xt.iter().map(|v| v * v).sum::<f64>() / (width * width);
                if q >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - q) * (1.0 - q)
                }
            }
        }
    }

    pub fn gradient(&self, xt: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; xt.len()];
        match *self {
            GraphProfile::Constant { .. } => {}
            GraphProfile::Cosine {
                amplitude,
                wavelength,
            } => {
                if let Some(first) = g.first_mut() {
                    let k = 2.0 * PI / wavelength;
                    *first = -amplitude * k * (k * xt[0]).sin();
                }
            }
            GraphProfile::Bump { amplitude, width } => {
                let w2 = width * width;
                let q = xt.iter().map(|v| v * v).sum::<f64>() / w2;
                if q < 1.0 {
                    for (gi, xi) in g.iter_mut().zip(xt) {
                        *gi = -4.0 * amplitude * (1.0 - q) * xi / w2;
                    }
                }
            }
        }
        g
    }

    /// Analytic Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            GraphProfile::Constant { .. } => 0.0,
            GraphProfile::Cosine {
                amplitude,
                wavelength,
            } => 2.0 * PI * amplitude.abs() / wavelength,
            GraphProfile::Bump { amplitude, width } => {
                8.0 * amplitude.abs() / (3.0 * 3f64.sqrt() * width)
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            GraphProfile::Constant { value } => value,
            GraphProfile::Cosine { amplitude, .. } | GraphProfile::Bump { amplitude, .. } => amplitude.abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            GraphProfile::Constant { value } => value.is_finite(),
            GraphProfile::Cosine {
                amplitude,
                wavelength,
            } => amplitude.is_finite() && wavelength > 0.0,
            GraphProfile::Bump { amplitude, width } => amplitude.is_finite() && width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad graph profile {self:?}")))
        }
    }
}

/// The state space of the killed Brownian motion. Balls are centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Domain {
    HalfSpace { d: usize },
    Ball { d: usize, radius: f64 },
    ExteriorBall { d: usize, radius: f64 },
    AboveGraph { d: usize, profile: GraphProfile },
}

/// Boundary distance with the width of its bracket (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub width: f64,
}

impl Domain {
    pub fn half_space(d: usize) -> Self {
        Domain::HalfSpace { d }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::HalfSpace { d }
            | Domain::Ball { d, .. }
            | Domain::ExteriorBall { d, .. }
            | Domain::AboveGraph { d, .. } => d,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Domain::Ball { .. })
    }

    /// A half-space, or a flat graph which is a translated half-space.
    pub fn flat_offset(&self) -> Option<f64> {
        match *self {
            Domain::HalfSpace { .. } => Some(0.0),
            Domain::AboveGraph {
                profile: GraphProfile::Constant { value },
                ..
            } => Some(value),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(Error::InvalidArgument(format!(
                "dimension must be at least 2, got {}",
                self.dim()
            )));
        }
        match *self {
            Domain::Ball { radius, .. } | Domain::ExteriorBall { radius, .. } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
                }
            }
            Domain::AboveGraph { profile, .. } => profile.validate()?,
            Domain::HalfSpace { .. } => {}
        }
        Ok(())
    }

    /// Operations that need `d ≥ 3` on unbounded domains call this.
    pub fn require_transient_dimension(&self) -> Result<()> {
        if !self.is_bounded() && self.dim() < 3 {
            return Err(Error::Unsupported(format!(
                "unbounded domains need d ≥ 3 here, got d = {}",
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, domain has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let d = self.dim();
        match *self {
            Domain::HalfSpace { .. } => x[d - 1] > 0.0,
            Domain::Ball { radius, .. } => norm(x) < radius,
            Domain::ExteriorBall { radius, .. } => norm(x) > radius,
            Domain::AboveGraph { profile, .. } => x[d - 1] > profile.height(&x[..d - 1]),
        }
    }

    /// `δ(x)`; exact except above a curved graph, where the midpoint of the
    /// bracket `[g/√(1+L²), g]`, `g = x_d − h(x̃)`, is returned.
    pub fn distance(&self, x: &[f64]) -> Result<Distance> {
        self.check_point(x)?;
        if !self.contains(x) {
            return Err(Error::OutsideDomain(format!("{x:?}")));
        }
        let d = self.dim();
        let exact = |value| Distance { value, width: 0.0 };
        Ok(match *self {
            Domain::HalfSpace { .. } => exact(x[d - 1]),
            Domain::Ball { radius, .. } => exact(radius - norm(x)),
            Domain::ExteriorBall { radius, .. } => exact(norm(x) - radius),
            Domain::AboveGraph { profile, .. } => {
                let g = x[d - 1] - profile.height(&x[..d - 1]);
                let l = profile.lipschitz();
                if l == 0.0 {
                    exact(g)
                } else {
                    let lo = g / (1.0 + l * l).sqrt();
                    Distance {
                        value: 0.5 * (lo + g),
                        width: g - lo,
                    }
                }
            }
        })
    }

    /// Distance from the closed box `[lo, hi]` to the boundary, when the box
    /// lies in the closure of `D`; zero if it meets the complement.
    pub fn box_distance(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        let d = self.dim();
        match *self {
            Domain::HalfSpace { .. } => Ok(lo[d - 1].max(0.0)),
            Domain::AboveGraph {
                profile: GraphProfile::Constant { value },
                ..
            } => Ok((lo[d - 1] - value).max(0.0)),
            Domain::Ball { radius, .. } => {
                // farthest point of the box from the centre
                let far: f64 = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let m = a.abs().max(b.abs());
                        m * m
                    })
                    .sum::<f64>()
                    .sqrt();
                Ok((radius - far).max(0.0))
            }
            Domain::ExteriorBall { radius, .. } => {
                let near: f64 = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let m = if *a > 0.0 {
                            *a
                        } else if *b < 0.0 {
                            -*b
                        } else {
                            0.0
                        };
                        m * m
                    })
                    .sum::<f64>()
                    .sqrt();
                Ok((near - radius).max(0.0))
            }
            Domain::AboveGraph { .. } => Err(Error::Unsupported(
                "box distance above a curved graph is only bracketed".into(),
            )),
        }
    }

    /// Whether the closed box is disjoint from `D`.
    pub fn box_outside(&self, lo: &[f64], hi: &[f64]) -> bool {
        let d = self.dim();
        match *self {
            Domain::HalfSpace { .. } => hi[d - 1] <= 0.0,
            Domain::AboveGraph { profile, .. } => {
                let floor = match profile {
                    GraphProfile::Constant { value } => value,
                    _ => -profile.sup(),
                };
                hi[d - 1] <= floor
            }
            Domain::Ball { radius, .. } => {
                let near: f64 = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let m = if *a > 0.0 {
                            *a
                        } else if *b < 0.0 {
                            -*b
                        } else {
                            0.0
                        };
                        m * m
                    })
                    .sum::<f64>()
                    .sqrt();
                near >= radius
            }
            Domain::ExteriorBall { radius, .. } => {
                let far: f64 = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let m = a.abs().max(b.abs());
                        m * m
                    })
                    .sum::<f64>()
                    .sqrt();
                far <= radius
            }
        }
    }

    /// Inward unit normal at a boundary point.
    pub fn inward_normal(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z)?;
        let d = self.dim();
        let on_boundary_tol = 1e-9;
        match *self {
            Domain::HalfSpace { .. } => {
                if z[d - 1].abs() > on_boundary_tol {
                    return Err(Error::Geometry(format!("{z:?} is not on the boundary")));
                }
                let mut n = vec![0.0; d];
                n[d - 1] = 1.0;
                Ok(n)
            }
            Domain::Ball { radius, .. } | Domain::ExteriorBall { radius, .. } => {
                let r = norm(z);
                if (r - radius).abs() > on_boundary_tol * radius.max(1.0) {
                    return Err(Error::Geometry(format!("{z:?} is not on the boundary")));
                }
                let sign = if matches!(self, Domain::Ball { .. }) { -1.0 } else { 1.0 };
                Ok(z.iter().map(|v| sign * v / r).collect())
            }
            Domain::AboveGraph { profile, .. } => {
                let h = profile.height(&z[..d - 1]);
                if (z[d - 1] - h).abs() > on_boundary_tol {
                    return Err(Error::Geometry(format!("{z:?} is not on the boundary")));
                }
                let g = profile.gradient(&z[..d - 1]);
                let mut n: Vec<f64> = g.iter().map(|v| -v).collect();
                n.push(1.0);
                let len = norm(&n);
                Ok(n.iter().map(|v| v / len).collect())
            }
        }
    }

    /// Mirror image across the boundary of a flat domain.
    pub fn mirror(&self, y: &[f64]) -> Option<Vec<f64>> {
        let c = self.flat_offset()?;
        let mut m = y.to_vec();
        let d = m.len();
        m[d - 1] = 2.0 * c - m[d - 1];
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert_eq!(Domain::half_space(3).distance(&[0.0, 0.0, 2.0]).unwrap().value, 2.0);
        let b = Domain::Ball { d: 3, radius: 1.0 };
        assert_eq!(b.distance(&[0.5, 0.0, 0.0]).unwrap().value, 0.5);
        let g = Domain::AboveGraph {
            d: 3,
            profile: GraphProfile::Constant { value: 0.0 },
        };
        let dd = g.distance(&[1.0, 1.0, 0.25]).unwrap();
        assert_eq!(dd.value, 0.25);
        assert_eq!(dd.width, 0.0);
        assert!(matches!(
            Domain::half_space(3).distance(&[0.0, 0.0, -1.0]),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn curved_graph_bracket_contains_true_distance() {
        let profile = GraphProfile::Cosine {
            amplitude: 0.1,
            wavelength: 2.0,
        };
        let dom = Domain::AboveGraph { d: 2, profile };
        let x = [0.3, 0.5];
        let dd = dom.distance(&x).unwrap();
        // brute-force nearest boundary point
        let mut best = f64::INFINITY;
        for i in 0..200_001 {
            let u = -2.0 + 4.0 * i as f64 / 200_000.0;
            let h = profile.height(&[u]);
            best = best.min(((u - x[0]).powi(2) + (h - x[1]).powi(2)).sqrt());
        }
        assert!(best >= dd.value - 0.5 * dd.width - 1e-9);
        assert!(best <= dd.value + 0.5 * dd.width + 1e-9);
    }

    #[test]
    fn exterior_and_normals() {
        let e = Domain::ExteriorBall { d: 3, radius: 1.0 };
        assert!((e.distance(&[0.0, 3.0, 0.0]).unwrap().value - 2.0).abs() < 1e-15);
        let n = e.inward_normal(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(n, vec![0.0, 1.0, 0.0]);
        let n = Domain::Ball { d: 2, radius: 2.0 }.inward_normal(&[2.0, 0.0]).unwrap();
        assert_eq!(n, vec![-1.0, 0.0]);
    }
}
