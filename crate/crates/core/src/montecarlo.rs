//! Path simulation of `Y^D_t = W^D_{S_t}` in the half-space.
//!
//! The subordinator is sampled on a grid `kh` in its own clock; the Brownian
//! motion is sampled at the subordinated times `S_{kh}`, and killing within
//! each Brownian segment is decided by the exact bridge-minimum law. Every
//! path draws from its own ChaCha stream, so results replay bit for bit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::bernstein::BernsteinModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::Domain;
use crate::normalization::VARIANCE_PER_TIME;

/// An axis-aligned cube `center ± side/2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cell {
    pub fn volume(&self) -> f64 {
        self.side.powi(self.center.len() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = 0.5 * self.side;
        x.iter().zip(&self.center).all(|(v, c)| (v - c).abs() < h)
    }

    fn lower(&self) -> Vec<f64> {
        self.center.iter().map(|c| c - 0.5 * self.side).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Step of the subordinator clock.
    pub h: f64,
    /// Horizon `T` of the subordinator clock.
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    /// Batches for the standard error.
    pub batches: usize,
    /// Disable killing to simulate the free process on the same draws.
    pub killing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            h: 0.02,
            horizon: 10.0,
            paths: 100_000,
            seed: 0x5eed,
            batches: 20,
            killing: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {}", self.h)));
        }
        if !(self.horizon >= self.h && self.horizon.is_finite()) {
            return Err(invalid(format!("horizon {} must be at least the step {}", self.horizon, self.h)));
        }
        if self.paths < 1 {
            return Err(invalid("need at least one path"));
        }
        if self.batches < 20 {
            return Err(invalid(format!("need at least 20 batches, got {}", self.batches)));
        }
        if self.paths < self.batches {
            return Err(invalid(format!(
                "{} paths cannot fill {} batches",
                self.paths, self.batches
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.h - 1e-9).ceil() as usize
    }
}

fn supported(model: &BernsteinModel) -> Result<()> {
    model.validate()?;
    if let BernsteinModel::RelativisticStable { .. } = model {
        return Err(Error::Unsupported(
            "no exact sampler for the relativistic stable subordinator".into(),
        ));
    }
    Ok(())
}

/// One-sided `a`-stable variable with `E e^{-λS} = e^{-λ^a}` (Kanter).
fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a >= 1.0 {
        return 1.0;
    }
    let u: f64 = rng.gen::<f64>() * PI;
    let e: f64 = Exp1.sample(rng);
    let num = (a * u).sin() / u.sin().powf(1.0 / a);
    num * ((1.0 - a) * u).sin().powf((1.0 - a) / a) / e.powf((1.0 - a) / a)
}

fn gamma_time<R: Rng + ?Sized>(t: f64, rng: &mut R) -> f64 {
    Gamma::new(t, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0)
}

/// `S_t` for the geometric stable subordinator: a stable subordinator run
/// to an independent Gamma time.
fn geometric_increment<R: Rng + ?Sized>(a: f64, t: f64, rng: &mut R) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let g = gamma_time(t, rng);
    g.powf(1.0 / a) * positive_stable(a, rng)
}

fn increment<R: Rng + ?Sized>(model: &BernsteinModel, t: f64, rng: &mut R) -> f64 {
    let a = model.half_alpha();
    match *model {
        BernsteinModel::Stable { .. } => t.powf(1.0 / a) * positive_stable(a, rng),
        BernsteinModel::GeometricStable { .. } => geometric_increment(a, t, rng),
        BernsteinModel::IteratedGeometric { n, .. } => {
            // φ_n = φ_geo ∘ φ_{n-1}: run the level below to a geometric time
            let mut time = t;
            for _ in 0..n {
                time = geometric_increment(a, time, rng);
            }
            time
        }
        BernsteinModel::RelativisticStable { .. } => f64::NAN,
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n_steps` independent increments `S_{(k+1)h} - S_{kh}`.
pub fn sample_subordinator(model: &BernsteinModel, h: f64, n_steps: usize, seed: u64) -> Result<Vec<f64>> {
    supported(model)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("time step must be positive, got {h}")));
    }
    let mut rng = stream(seed, 0);
    Ok((0..n_steps).map(|_| increment(model, h, &mut rng)).collect())
}

/// Positions of one path at the grid times `kh`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathRecord {
    /// `S_{kh}`, `k = 0..`.
    pub subordinator: Vec<f64>,
    /// `W_{S_{kh}}` while alive.
    pub positions: Vec<Vec<f64>>,
    /// The step during which the path was killed.
    pub lifetime: Option<usize>,
}

fn check_half_space(domain: &Domain, x: &[f64]) -> Result<usize> {
    if !matches!(domain, Domain::HalfSpace { .. }) {
        return Err(Error::Unsupported("path simulation is implemented for the half-space".into()));
    }
    domain.validate()?;
    let d = domain.dim();
    if x.len() != d {
        return Err(invalid(format!("start has {} coordinates, domain has dimension {d}", x.len())));
    }
    if !domain.contains(x) {
        return Err(Error::OutsideDomain(format!("{x:?}")));
    }
    Ok(d)
}

/// Walk one path, calling `visit(k, y)` at each surviving grid time `k ≥ 1`.
/// Returns the step of death, if any.
fn walk<F: FnMut(usize, &[f64], f64)>(
    model: &BernsteinModel,
    x: &[f64],
    config: &SimConfig,
    index: u64,
    mut visit: F,
) -> Option<usize> {
    let d = x.len();
    let mut rng = stream(config.seed, index);
    let mut y = x.to_vec();
    let mut s = 0.0;
    for k in 1..=config.steps() {
        let ds = increment(model, config.h, &mut rng);
        let scale = (VARIANCE_PER_TIME * ds).sqrt();
        let before = y[d - 1];
        for yi in y.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *yi += scale * z;
        }
        let u: f64 = rng.gen();
        s += ds;
        if config.killing {
            let after = y[d - 1];
            // the bridge from height a to b over Brownian time Δ stays
            // positive with probability 1 - exp(-ab/Δ)
            let crossed = after <= 0.0 || (ds > 0.0 && u < (-(before * after) / ds).exp());
            if crossed {
                return Some(k);
            }
        }
        visit(k, &y, s);
    }
    None
}

pub fn simulate_skbm_path(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    config: &SimConfig,
    index: u64,
) -> Result<PathRecord> {
    supported(model)?;
    config.validate()?;
    check_half_space(domain, x)?;
    let mut subordinator = vec![0.0];
    let mut positions = vec![x.to_vec()];
    let lifetime = walk(model, x, config, index, |_, y, s| {
        subordinator.push(s);
        positions.push(y.to_vec());
    });
    Ok(PathRecord {
        subordinator,
        positions,
        lifetime,
    })
}

/// Fraction of paths whose first Brownian segment, of fixed length `t`,
/// stays in the half-space above height `delta`.
pub fn first_segment_survival(delta: f64, t: f64, paths: usize, seed: u64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && t > 0.0) || paths == 0 {
        return Err(invalid("need positive height, time and path count"));
    }
    let mut alive = 0usize;
    for i in 0..paths {
        let mut rng = stream(seed, i as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        let b = delta + (VARIANCE_PER_TIME * t).sqrt() * z;
        let u: f64 = rng.gen();
        if b > 0.0 && u >= (-(delta * b) / t).exp() {
            alive += 1;
        }
    }
    let p = alive as f64 / paths as f64;
    Ok((p, (p * (1.0 - p) / paths as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GreenMCEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Paths that reached the cell or survived to the horizon.
    pub effective_paths: usize,
    pub cell_volume: f64,
    pub paths: usize,
    pub batches: usize,
    pub seed: u64,
    pub h: f64,
    pub horizon: f64,
    /// Upper bound on `∫_T^∞ p(t, x, y) u(t) dt` for the free kernel.
    pub tail_bound: f64,
}

/// `∫_T^∞ (4πt)^{-d/2} u(t) dt`, bounding the truncated tail of the Green
/// integral for any pair of points.
pub fn horizon_tail_bound(model: &BernsteinModel, d: usize, horizon: f64) -> Result<f64> {
    let f = |t: f64| (-0.5 * d as f64 * (4.0 * PI * t).ln()).exp() * model.u(t);
    Ok(crate::quad::integrate_to_infinity(f, horizon, crate::quad::Tolerance::new(1e-14, 1e-8))?.value)
}

/// Occupation estimate of the Green function averaged over `cell`:
/// `E Σ_k h 1{Y_{kh} ∈ cell} / |cell|`.
pub fn estimate_green_mc(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    cell: &Cell,
    config: &SimConfig,
) -> Result<GreenMCEstimate> {
    estimate_green_mc_range(domain, model, x, cell, config, 0..config.paths).and_then(|p| p.finish(config))
}

/// Per-batch accumulators of an occupation estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialEstimate {
    pub batch_sums: Vec<f64>,
    pub batch_counts: Vec<usize>,
    pub effective: usize,
    pub cell_volume: f64,
    pub tail_bound: f64,
}

impl PartialEstimate {
    /// Associative merge of disjoint path ranges.
    pub fn merge(mut self, other: PartialEstimate) -> PartialEstimate {
        for (a, b) in self.batch_sums.iter_mut().zip(&other.batch_sums) {
            *a += b;
        }
        for (a, b) in self.batch_counts.iter_mut().zip(&other.batch_counts) {
            *a += b;
        }
        self.effective += other.effective;
        self
    }

    pub fn finish(self, config: &SimConfig) -> Result<GreenMCEstimate> {
        if self.effective == 0 {
            return Err(Error::NoEffectivePaths(
                "every path was killed before reaching the cell".into(),
            ));
        }
        let means: Vec<f64> = self
            .batch_sums
            .iter()
            .zip(&self.batch_counts)
            .map(|(s, c)| s / *c as f64)
            .collect();
        let b = means.len() as f64;
        let total: usize = self.batch_counts.iter().sum();
        let value = self.batch_sums.iter().sum::<f64>() / total as f64;
        let var = means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (b - 1.0);
        Ok(GreenMCEstimate {
            value,
            std_error: (var / b).sqrt(),
            effective_paths: self.effective,
            cell_volume: self.cell_volume,
            paths: total,
            batches: means.len(),
            seed: config.seed,
            h: config.h,
            horizon: config.horizon,
            tail_bound: self.tail_bound,
        })
    }
}

/// Accumulate paths `range` of an occupation estimate. Path `i` belongs to
/// batch `i · batches / paths`.
pub fn estimate_green_mc_range(
    domain: &Domain,
    model: &BernsteinModel,
    x: &[f64],
    cell: &Cell,
    config: &SimConfig,
    range: core::ops::Range<usize>,
) -> Result<PartialEstimate> {
    supported(model)?;
    config.validate()?;
    let d = check_half_space(domain, x)?;
    if cell.center.len() != d || !(cell.side > 0.0) {
        return Err(invalid("cell must be a cube of positive side in the domain's dimension"));
    }
    if cell.lower()[d - 1] <= 0.0 {
        return Err(Error::Geometry("cell is not inside the half-space".into()));
    }
    if cell.contains(x) {
        return Err(invalid("start point lies in the cell"));
    }
    let vol = cell.volume();
    let mut sums = vec![0.0; config.batches];
    let mut counts = vec![0usize; config.batches];
    let mut effective = 0;
    for i in range {
        if i >= config.paths {
            break;
        }
        let mut occ = 0.0;
        let died = walk(model, x, config, i as u64, |_, y, _| {
            if cell.contains(y) {
                occ += config.h;
            }
        });
        if occ > 0.0 || died.is_none() {
            effective += 1;
        }
        let b = i * config.batches / config.paths;
        sums[b] += occ / vol;
        counts[b] += 1;
    }
    Ok(PartialEstimate {
        batch_sums: sums,
        batch_counts: counts,
        effective,
        cell_volume: vol,
        tail_bound: horizon_tail_bound(model, d, config.horizon)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::erf;

    fn laplace_check(model: BernsteinModel, want: f64) {
        let draws = sample_subordinator(&model, 1.0, 100_000, 7).unwrap();
        let vals: Vec<f64> = draws.iter().map(|s| (-s).exp()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - want).abs() < 3.0 * sd / n.sqrt(), "{model:?}: {mean} vs {want}");
    }

    #[test]
    fn subordinator_laplace_transforms() {
        laplace_check(BernsteinModel::stable(1.0), (-1.0f64).exp());
        laplace_check(BernsteinModel::geometric(1.0), 0.5);
        // φ₂(1) = log(1 + (log 2)^{1/2})
        let phi2 = (1.0 + 2f64.ln().sqrt()).ln();
        laplace_check(BernsteinModel::IteratedGeometric { alpha: 1.0, n: 2 }, (-phi2).exp());
    }

    #[test]
    fn increments_are_positive() {
        for m in [BernsteinModel::stable(1.0), BernsteinModel::geometric(1.0)] {
            let inc = sample_subordinator(&m, 1.0, 10_000, 3).unwrap();
            assert!(inc.iter().all(|v| *v > 0.0));
        }
        let rel = BernsteinModel::RelativisticStable { alpha: 1.0, m: 1.0 };
        assert!(matches!(sample_subordinator(&rel, 1.0, 1, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn replay_is_exact() {
        let d = Domain::half_space(3);
        let m = BernsteinModel::stable(1.0);
        let cfg = SimConfig {
            paths: 20,
            ..Default::default()
        };
        let a = simulate_skbm_path(&d, &m, &[0.0, 0.0, 1.0], &cfg, 5).unwrap();
        let b = simulate_skbm_path(&d, &m, &[0.0, 0.0, 1.0], &cfg, 5).unwrap();
        assert_eq!(a, b);
        let c = simulate_skbm_path(&d, &m, &[0.0, 0.0, 1.0], &cfg, 6).unwrap();
        assert_ne!(a, c);
        assert!(a.subordinator.windows(2).all(|w| w[1] >= w[0]));
        assert!(simulate_skbm_path(&d, &m, &[0.0, 0.0, -1.0], &cfg, 0).is_err());
    }

    #[test]
    fn no_kills_far_from_boundary() {
        let d = Domain::half_space(2);
        let m = BernsteinModel::stable(1.0);
        let cfg = SimConfig {
            h: 1e-4,
            horizon: 1e-3,
            paths: 10_000,
            ..Default::default()
        };
        for i in 0..cfg.paths as u64 {
            let p = simulate_skbm_path(&d, &m, &[0.0, 1e3], &cfg, i).unwrap();
            assert!(p.lifetime.is_none());
        }
    }

    #[test]
    fn first_segment_matches_erf() {
        let t = 1.0;
        for delta in [0.1, 0.5, 1.0, 2.0] {
            let (p, se) = first_segment_survival(delta, t, 100_000, 11).unwrap();
            let want = erf(delta / (2.0 * t.sqrt()));
            assert!((p - want).abs() < 3.0 * se.max(1e-4), "{delta}: {p} vs {want}");
        }
    }

    #[test]
    fn kill_fraction_grows_with_time() {
        let d = Domain::half_space(3);
        let m = BernsteinModel::stable(1.0);
        let mut last = 0.0;
        for horizon in [0.1, 0.5, 2.0] {
            let cfg = SimConfig {
                h: 0.05,
                horizon,
                paths: 2000,
                ..Default::default()
            };
            let killed = (0..cfg.paths as u64)
                .filter(|i| simulate_skbm_path(&d, &m, &[0.0, 0.0, 0.5], &cfg, *i).unwrap().lifetime.is_some())
                .count() as f64
                / cfg.paths as f64;
            assert!(killed >= last);
            last = killed;
        }
        assert!(last > 0.0);
    }

    #[test]
    fn unreachable_cell_and_errors() {
        let d = Domain::half_space(3);
        let m = BernsteinModel::stable(1.0);
        let cfg = SimConfig {
            h: 1e-3,
            horizon: 1e-2,
            paths: 400,
            ..Default::default()
        };
        let cell = Cell {
            center: vec![0.0, 0.0, 50.0],
            side: 0.25,
        };
        let e = estimate_green_mc(&d, &m, &[0.0, 0.0, 1.0], &cell, &cfg).unwrap();
        assert_eq!(e.value, 0.0);
        let inside = Cell {
            center: vec![0.0, 0.0, 1.0],
            side: 0.25,
        };
        assert!(estimate_green_mc(&d, &m, &[0.0, 0.0, 1.0], &inside, &cfg).is_err());
        let few = SimConfig {
            batches: 10,
            ..cfg.clone()
        };
        assert!(few.validate().is_err());
    }

    #[test]
    fn killing_only_lowers_occupation() {
        let d = Domain::half_space(3);
        let m = BernsteinModel::stable(1.0);
        let cell = Cell {
            center: vec![0.0, 0.0, 1.5],
            side: 0.5,
        };
        let cfg = SimConfig {
            h: 0.05,
            horizon: 2.0,
            paths: 2000,
            ..Default::default()
        };
        let killed = estimate_green_mc(&d, &m, &[0.0, 0.0, 0.5], &cell, &cfg).unwrap();
        let free = estimate_green_mc(
            &d,
            &m,
            &[0.0, 0.0, 0.5],
            &cell,
            &SimConfig {
                killing: false,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert!(killed.value <= free.value);
        let longer = estimate_green_mc(
            &d,
            &m,
            &[0.0, 0.0, 0.5],
            &cell,
            &SimConfig {
                horizon: 4.0,
                ..cfg
            },
        )
        .unwrap();
        assert!(longer.value >= killed.value);
    }
}
