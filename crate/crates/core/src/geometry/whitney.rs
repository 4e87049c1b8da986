//! Whitney decomposition by maximal dyadic cubes.
//!
//! A dyadic cube `Q` of the lattice anchored at the window's lower corner is
//! selected when `diam Q ≤ dist(Q, ∂D)` while its parent violates the same
//! inequality. Parent violation gives `dist(Q, ∂D) < 4 diam Q`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::Domain;
use crate::error::{Error, Result};

pub const MAX_GENERATION: u32 = 40;

/// Axis-aligned box `[lo, hi)`. Every side must be an integer multiple of
/// the shortest one, which is the side of the generation-0 cubes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Window { lo, hi }
    }

    /// The cube `[lo, lo + side)^d`.
    pub fn cube(lo: &[f64], side: f64) -> Self {
        Window {
            lo: lo.to_vec(),
            hi: lo.iter().map(|v| v + side).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn base_side(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min)
    }

    fn validate(&self, d: usize) -> Result<Vec<usize>> {
        if self.lo.len() != d || self.hi.len() != d {
            return Err(Error::InvalidArgument(format!(
                "window dimension {} does not match domain dimension {d}",
                self.lo.len()
            )));
        }
        let s = self.base_side();
        if !(s > 0.0 && s.is_finite()) || self.lo.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("degenerate window".into()));
        }
        let mut counts = Vec::with_capacity(d);
        for (a, b) in self.lo.iter().zip(&self.hi) {
            let q = (b - a) / s;
            let n = q.round();
            if (q - n).abs() > 1e-9 * n {
                return Err(Error::InvalidArgument(format!(
                    "window sides must be integer multiples of the shortest side {s}"
                )));
            }
            counts.push(n as usize);
        }
        Ok(counts)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v < *b)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WhitneyCube {
    pub generation: u32,
    pub corner: Vec<f64>,
    pub side: f64,
    pub diam: f64,
    pub dist: f64,
    /// The closed cube touches the boundary of the window.
    pub rim: bool,
    /// A generation-0 cube whose parent would also qualify, so maximality is
    /// cut off by the window.
    pub window_limited: bool,
}

impl WhitneyCube {
    pub fn center(&self) -> Vec<f64> {
        self.corner.iter().map(|c| c + 0.5 * self.side).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.corner.iter().map(|c| c + self.side).collect()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.corner.len() as i32)
    }

    /// Whether the open interiors of two cubes intersect, ignoring overlaps
    /// at the rounding level of the coordinates.
    pub fn interiors_meet(&self, other: &WhitneyCube) -> bool {
        let tol = 1e-12 * self.side.max(other.side);
        self.corner
            .iter()
            .zip(&other.corner)
            .all(|(a, b)| a.max(*b) + tol < (a + self.side).min(b + other.side))
    }

    /// The cube dilated by `factor` about its centre.
    pub fn dilated(&self, factor: f64) -> (Vec<f64>, Vec<f64>) {
        let c = self.center();
        let h = 0.5 * factor * self.side;
        (c.iter().map(|v| v - h).collect(), c.iter().map(|v| v + h).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WhitneyDecomposition {
    pub domain: Domain,
    pub window: Window,
    pub max_generation: u32,
    pub cubes: Vec<WhitneyCube>,
}

impl WhitneyDecomposition {
    /// Cubes usable in capacity sums: not on the window rim.
    pub fn interior_cubes(&self) -> impl Iterator<Item = &WhitneyCube> {
        self.cubes.iter().filter(|c| !c.rim)
    }
}

pub fn whitney_decompose(domain: &Domain, window: &Window, max_generation: u32) -> Result<WhitneyDecomposition> {
    whitney_decompose_filtered(domain, window, max_generation, |_, _| true)
}

/// As [`whitney_decompose`], skipping every dyadic subtree whose closed box
/// `[lo, hi]` is rejected by `keep`.
pub fn whitney_decompose_filtered<F: FnMut(&[f64], &[f64]) -> bool>(
    domain: &Domain,
    window: &Window,
    max_generation: u32,
    mut keep: F,
) -> Result<WhitneyDecomposition> {
    domain.validate()?;
    let d = domain.dim();
    let counts = window.validate(d)?;
    if max_generation > MAX_GENERATION {
        return Err(Error::InvalidArgument(format!(
            "max_generation {max_generation} exceeds {MAX_GENERATION}"
        )));
    }
    let s0 = window.base_side();
    let extent = window
        .lo
        .iter()
        .chain(&window.hi)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let finest = s0 * (-(max_generation as f64)).exp2();
    if finest <= extent * 1e-13 {
        return Err(Error::InvalidArgument(format!(
            "max_generation {max_generation} too large for coordinate precision"
        )));
    }
    if domain.box_outside(&window.lo, &window.hi) {
        return Err(Error::Geometry("window does not meet the domain".into()));
    }
    let sqrt_d = (d as f64).sqrt();

    let mut stack: Vec<(u32, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let corner: Vec<f64> = (0..d).map(|i| window.lo[i] + idx[i] as f64 * s0).collect();
        stack.push((0, corner));
        let mut i = 0;
        while i < d {
            idx[i] += 1;
            if idx[i] < counts[i] {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }

    let mut cubes = Vec::new();
    let mut hi = vec![0.0; d];
    while let Some((k, corner)) = stack.pop() {
        let side = s0 * (-(k as f64)).exp2();
        for i in 0..d {
            hi[i] = corner[i] + side;
        }
        if domain.box_outside(&corner, &hi) || !keep(&corner, &hi) {
            continue;
        }
        let dist = domain.box_distance(&corner, &hi)?;
        let diam = side * sqrt_d;
        if diam <= dist {
            let rim = (0..d).any(|i| corner[i] <= window.lo[i] || hi[i] >= window.hi[i]);
            let window_limited = k == 0 && {
                let plo: Vec<f64> = (0..d)
                    .map(|i| window.lo[i] + ((corner[i] - window.lo[i]) / (2.0 * s0)).floor() * 2.0 * s0)
                    .collect();
                let phi: Vec<f64> = plo.iter().map(|v| v + 2.0 * s0).collect();
                !domain.box_outside(&plo, &phi) && 2.0 * diam <= domain.box_distance(&plo, &phi)?
            };
            cubes.push(WhitneyCube {
                generation: k,
                corner,
                side,
                diam,
                dist,
                rim,
                window_limited,
            });
        } else if k < max_generation {
            let half = 0.5 * side;
            for mask in 0..(1usize << d) {
                let child: Vec<f64> = (0..d)
                    .map(|i| corner[i] + if mask >> i & 1 == 1 { half } else { 0.0 })
                    .collect();
                stack.push((k + 1, child));
            }
        }
    }
    cubes.sort_by(|a, b| {
        a.generation
            .cmp(&b.generation)
            .then_with(|| a.corner.partial_cmp(&b.corner).unwrap_or(core::cmp::Ordering::Equal))
    });
    Ok(WhitneyDecomposition {
        domain: *domain,
        window: window.clone(),
        max_generation,
        cubes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn has_cube(dec: &WhitneyDecomposition, corner: &[f64], side: f64) -> bool {
        dec.cubes.iter().any(|c| c.corner == corner && c.side == side)
    }

    #[test]
    fn half_plane_example() {
        let dom = Domain::half_space(2);
        let dec = whitney_decompose(&dom, &Window::cube(&[0.0, 0.0], 8.0), 5).unwrap();
        assert!(has_cube(&dec, &[0.0, 4.0], 2.0));
        assert!(!has_cube(&dec, &[0.0, 4.0], 1.0));
        assert!(!has_cube(&dec, &[0.0, 4.0], 4.0));
    }

    #[test]
    fn brute_force_enumeration_agrees() {
        // enumerate every dyadic square of generations 0..=4 in [0,8)² and
        // apply the maximality rule directly
        let dom = Domain::half_space(2);
        let dec = whitney_decompose(&dom, &Window::cube(&[0.0, 0.0], 8.0), 4).unwrap();
        let got: BTreeSet<(u32, i64, i64)> = dec
            .cubes
            .iter()
            .map(|c| (c.generation, (c.corner[0] * 16.0) as i64, (c.corner[1] * 16.0) as i64))
            .collect();
        let qualifies = |y: f64, s: f64| s * 2f64.sqrt() <= y;
        let mut want = BTreeSet::new();
        for k in 0..=4u32 {
            let s = 8.0 / (1u32 << k) as f64;
            let n = 1i64 << k;
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (i as f64 * s, j as f64 * s);
                    let parent_y = (y / (2.0 * s)).floor() * 2.0 * s;
                    let parent_ok = k > 0 && qualifies(parent_y, 2.0 * s);
                    if qualifies(y, s) && !parent_ok {
                        want.insert((k, (x * 16.0) as i64, (y * 16.0) as i64));
                    }
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn ball_cubes_are_whitney() {
        let dom = Domain::Ball { d: 2, radius: 1.0 };
        let dec = whitney_decompose(&dom, &Window::cube(&[-1.0, -1.0], 2.0), 8).unwrap();
        assert!(!dec.cubes.is_empty());
        for c in &dec.cubes {
            assert!(c.diam <= c.dist && c.dist <= 4.0 * c.diam, "{c:?}");
        }
    }

    #[test]
    fn interiors_disjoint() {
        let dom = Domain::half_space(2);
        let dec = whitney_decompose(&dom, &Window::cube(&[0.0, 0.0], 8.0), 3).unwrap();
        for (i, a) in dec.cubes.iter().enumerate() {
            for b in &dec.cubes[i + 1..] {
                assert!(!a.interiors_meet(b));
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let dom = Domain::half_space(2);
        assert!(whitney_decompose(&dom, &Window::cube(&[0.0, 0.0], 0.0), 3).is_err());
        assert!(whitney_decompose(&dom, &Window::cube(&[0.0, 0.0], 1.0), 41).is_err());
        assert!(whitney_decompose(&dom, &Window::cube(&[0.0, -2.0], 1.0), 3).is_err());
        assert!(whitney_decompose(&dom, &Window::new(vec![0.0, 0.0], vec![1.0, 1.5]), 3).is_err());
    }
}
