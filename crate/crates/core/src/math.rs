//! Special functions and small dense linear algebra.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for real `x` away from the non-positive integers.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln ln(1 + e^x)`, accurate for arbitrarily large `|x|`.
pub fn ln_softplus(x: f64) -> f64 {
    if x > 35.0 {
        (x + (-x).exp()).ln()
    } else if x < -35.0 {
        // ln(1+e^x) = e^x (1 - e^x/2 + ...)
        x - 0.5 * x.exp()
    } else {
        x.exp().ln_1p().ln()
    }
}

/// `ln(e^x - 1)` for `x > 0`.
pub fn ln_expm1(x: f64) -> f64 {
    if x > 35.0 {
        x + (-(-x).exp()).ln_1p()
    } else if x < 1e-8 {
        x.ln() + 0.5 * x
    } else {
        x.exp_m1().ln()
    }
}

/// `ln(Σ e^{v_i})`, ignoring `-∞` entries.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// Surface area of the unit sphere `S^{k}` in `R^{k+1}`.
pub fn sphere_area(k: usize) -> f64 {
    let n = (k + 1) as f64;
    2.0 * PI.powf(0.5 * n) / gamma(0.5 * n)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    let n = d as f64;
    PI.powf(0.5 * n) / gamma(0.5 * n + 1.0)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `n` points log-spaced over `[lo, hi]` (inclusive).
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// A logarithm split as `coef · s + rest` for a large scale variable `s`.
///
/// Keeping the multiple of `s` separate lets powers of `r = e^{-s}` cancel
/// exactly even when `s` itself is astronomically large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLinear {
    pub coef: f64,
    pub rest: f64,
}

impl LogLinear {
    pub const ZERO: LogLinear = LogLinear { coef: 0.0, rest: 0.0 };
    pub const NEG_INFINITY: LogLinear = LogLinear {
        coef: 0.0,
        rest: f64::NEG_INFINITY,
    };

    pub fn new(coef: f64, rest: f64) -> Self {
        LogLinear { coef, rest }
    }

    pub fn constant(rest: f64) -> Self {
        LogLinear { coef: 0.0, rest }
    }

    pub fn eval(self, s: f64) -> f64 {
        if self.coef == 0.0 {
            self.rest
        } else {
            self.coef * s + self.rest
        }
    }

    pub fn scale(self, c: f64) -> Self {
        LogLinear {
            coef: c * self.coef,
            rest: c * self.rest,
        }
    }

    pub fn is_neg_infinite(self) -> bool {
        self.rest == f64::NEG_INFINITY
    }
}

impl core::ops::Add for LogLinear {
    type Output = LogLinear;
    fn add(self, o: LogLinear) -> LogLinear {
        LogLinear {
            coef: self.coef + o.coef,
            rest: self.rest + o.rest,
        }
    }
}

impl core::ops::Sub for LogLinear {
    type Output = LogLinear;
    fn sub(self, o: LogLinear) -> LogLinear {
        LogLinear {
            coef: self.coef - o.coef,
            rest: self.rest - o.rest,
        }
    }
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Solve `min ||A c - y||₂` by Householder QR. `rows[i]` is the i-th row of `A`.
#[allow(clippy::needless_range_loop)]
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<LeastSquares> {
    let m = rows.len();
    if m == 0 || y.len() != m {
        return None;
    }
    let n = rows[0].len();
    if m < n {
        return None;
    }
    // column scaling keeps the QR well conditioned when regressors differ in size
    let mut scale = vec![0.0; n];
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            scale[j] = f64::max(scale[j], v.abs());
        }
    }
    for s in scale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&scale).map(|(v, s)| v / s).collect())
        .collect();
    let mut b = y.to_vec();
    for k in 0..n {
        let col_norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if col_norm == 0.0 {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -col_norm } else { col_norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut c = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * c[j];
        }
        if a[k][k].abs() < 1e-300 {
            return None;
        }
        c[k] = s / a[k][k];
    }
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, yi)| {
            let pred: f64 = row.iter().zip(&c).zip(&scale).map(|((r, ci), s)| r * ci / s).sum();
            (pred - yi) * (pred - yi)
        })
        .sum();
    let coefficients = c.iter().zip(&scale).map(|(ci, s)| ci / s).collect();
    Some(LeastSquares {
        coefficients,
        rms_residual: (rss / m as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() / 24.0 < 1e-14);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-14);
        // Γ(0.25) = 3.625609908221908...
        assert!((gamma(0.25) - 3.625_609_908_221_908).abs() / 3.6256 < 1e-13);
        assert!((ln_gamma(100.0) - 359.134_205_369_575_4).abs() / 359.13 < 1e-14);
    }

    #[test]
    fn softplus_family_is_stable() {
        assert!((ln_softplus(1e6) - 1e6f64.ln()).abs() < 1e-12);
        assert!((ln_softplus(-1e3) + 1e3).abs() < 1e-12);
        assert!((ln_softplus(0.0) - (2.0f64.ln()).ln()).abs() < 1e-15);
        assert!((ln_expm1(1.0) - (1.0f64.exp() - 1.0).ln()).abs() < 1e-15);
        assert!((ln_expm1(1e-12) - (1e-12f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn least_squares_recovers_exact_line() {
        let xs = linspace(1.0, 10.0, 20);
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![1.0, *x, x.ln()]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x + 3.0 * x.ln()).collect();
        let fit = least_squares(&rows, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((fit.coefficients[1] + 0.5).abs() < 1e-10);
        assert!((fit.coefficients[2] - 3.0).abs() < 1e-10);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}
