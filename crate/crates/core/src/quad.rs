//! Adaptive Gauss–Kronrod quadrature.
//!
//! The (7, 15) pair is refined by always bisecting the interval with the
//! largest error estimate. Half-lines and endpoint singularities are handled
//! in the logarithmic variable `u = ln t`, integrated chunk by chunk outward
//! until the contributions become negligible.

use alloc::collections::BinaryHeap;
use alloc::format;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Accuracy targets and work limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_evals: 1 << 16,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Tolerance::default()
        }
    }

    /// Loosen both targets by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel * factor,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

impl Estimate {
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evals: self.evals + other.evals,
        }
    }

    pub fn scale(self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            abs_error: self.abs_error * c.abs(),
            evals: self.evals,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    let value = k * h;
    let raw = ((k - g) * h).abs();
    // QUADPACK-style sharpening of the raw difference
    let err = if raw > 0.0 {
        let scaled = (200.0 * raw / value.abs().max(f64::MIN_POSITIVE)).powf(1.5);
        if scaled < 1.0 {
            raw * scaled.clamp(1e-3, 1.0)
        } else {
            raw
        }
    } else {
        0.0
    };
    (value, err.max(50.0 * f64::EPSILON * value.abs()))
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
///
/// Non-finite integrand values are an error.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate::default());
    }
    if a > b {
        return integrate(f, b, a, tol).map(|e| e.scale(-1.0));
    }
    let (v, e) = kronrod(&mut f, a, b);
    let mut evals = 15;
    let mut total = v;
    let mut total_err = e;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if evals + 30 > tol.max_evals {
            break;
        }
        let seg = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            heap.push(seg);
            break;
        }
        let (v1, e1) = kronrod(&mut f, seg.a, m);
        let (v2, e2) = kronrod(&mut f, m, seg.b);
        evals += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, error: e2 });
    }
    // recompute sums to shed accumulated rounding
    let mut value = 0.0;
    let mut error = 0.0;
    for s in heap.iter() {
        value += s.value;
        error += s.error;
    }
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Estimate {
        value,
        abs_error: error,
        evals,
    })
}

/// Integrate a nonnegative-ish `f` over `[lo, hi]` with `0 ≤ lo < hi ≤ ∞`
/// in the variable `u = ln t`.
///
/// Infinite ends are approached chunk by chunk, stopping once several
/// consecutive chunks contribute below the tolerance.
pub fn integrate_log<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Quadrature(format!("bad log range [{lo}, {hi}]")));
    }
    let mut g = |u: f64| {
        let t = u.exp();
        if t == 0.0 || !t.is_finite() {
            0.0
        } else {
            f(t) * t
        }
    };
    const CHUNK: f64 = 2.0;
    const U_MIN: f64 = -740.0;
    const U_MAX: f64 = 709.0;
    let chunk_tol = tol.scaled(0.25);
    let mut total = Estimate::default();
    let (ua, ub) = match (lo > 0.0, hi.is_finite()) {
        (true, true) => {
            let ua = lo.ln();
            let ub = hi.ln();
            return integrate(&mut g, ua, ub, tol);
        }
        (true, false) => (lo.ln(), lo.ln()),
        (false, true) => (hi.ln(), hi.ln()),
        (false, false) => (0.0, 0.0),
    };
    let mut run = |from: f64, dir: f64, total: &mut Estimate| -> Result<()> {
        let mut x = from;
        let mut quiet = 0;
        let mut width = CHUNK;
        while quiet < 3 {
            let next = x + dir * width;
            let (a, b) = if dir > 0.0 { (x, next.min(U_MAX)) } else { (next.max(U_MIN), x) };
            if b <= a {
                break;
            }
            let piece = integrate(&mut g, a, b, chunk_tol)?;
            *total = total.add(piece);
            let thresh = tol.abs.max(tol.rel * total.value.abs()) * 0.1;
            if piece.value.abs() <= thresh && total.value != 0.0 {
                quiet += 1;
                width *= 2.0;
            } else if piece.value == 0.0 && total.value == 0.0 {
                // integrand still identically zero here; keep scanning
                quiet += 1;
                width *= 2.0;
            } else {
                quiet = 0;
            }
            x = next;
            if x <= U_MIN || x >= U_MAX {
                break;
            }
        }
        Ok(())
    };
    if lo == 0.0 {
        run(ua, -1.0, &mut total)?;
    }
    if !hi.is_finite() {
        run(ub, 1.0, &mut total)?;
    }
    Ok(total)
}

/// [`integrate_log`] of `f / s`, rescaled by `s`, where `s` is the largest
/// `|f(t) t|` over `probes`. The absolute target then acts relative to the
/// natural size of the integral.
pub fn integrate_log_scaled<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    probes: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let s = probes
        .iter()
        .filter(|t| **t > 0.0 && t.is_finite())
        .map(|t| (f(*t) * t).abs())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    if s == 0.0 {
        return integrate_log(f, lo, hi, tol);
    }
    integrate_log(|t| f(t) / s, lo, hi, tol).map(|e| e.scale(s))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Integrate over `[a, ∞)` for any finite `a`, splitting at 1 for negative
/// or small starting points.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<Estimate> {
    if a > 0.0 {
        return integrate_log(f, a, f64::INFINITY, tol);
    }
    let head = integrate(&mut f, a, 1.0, tol)?;
    let tail = integrate_log(&mut f, 1.0, f64::INFINITY, tol)?;
    Ok(head.add(tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 5, 8, 13] {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "{n} {k}");
            }
        }
    }

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, Tolerance::default()).unwrap();
        assert!((e.value - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let e = integrate(|x| (10.0 * x).sin(), 0.0, PI, Tolerance::new(1e-13, 1e-12)).unwrap();
        assert!(e.value.abs() < 1e-11);
        let e = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::new(1e-12, 1e-11)).unwrap();
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((e.value - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn endpoint_singularity_in_log_variable() {
        let e = integrate_log(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8);
        let e = integrate_log(|x| x.powf(-1.25), 1.0, f64::INFINITY, Tolerance::default()).unwrap();
        assert!((e.value - 4.0).abs() < 1e-7);
    }

    #[test]
    fn whole_half_line() {
        // ∫₀^∞ t^{-3/2} e^{-1/t} e^{-t} dt = √π e^{-2}
        let e = integrate_log(
            |t| t.powf(-1.5) * (-1.0 / t - t).exp(),
            0.0,
            f64::INFINITY,
            Tolerance::default(),
        )
        .unwrap();
        let exact = PI.sqrt() * (-2.0f64).exp();
        assert!((e.value - exact).abs() / exact < 1e-8);
        let e = integrate_to_infinity(|t| (-t * t).exp(), -3.0, Tolerance::default()).unwrap();
        assert!((e.value - PI.sqrt() / 2.0 * (1.0 + libm::erf(3.0))).abs() < 1e-9);
    }
}
