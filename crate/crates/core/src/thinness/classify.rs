//! Convergence classification of annulus series.
//!
//! Two entry points. [`classify_density`] takes the log of a term density
//! `A(s)` as a closure and probes it far beyond any index that could be
//! summed, which pins the tail exponents down exactly. [`classify_terms`]
//! works from a finite list `a_1..a_N` by model selection on the tail.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::math::{least_squares, linspace, logspace, LogLinear};

/// Outcome of a thinness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Verdict {
    Thin,
    NotThin,
    Inconclusive,
}

impl Verdict {
    /// CLI status: Thin 0, NotThin 1, Inconclusive 2.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Thin => 0,
            Verdict::NotThin => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn is_decisive(self) -> bool {
        self != Verdict::Inconclusive
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Thin => "thin",
            Verdict::NotThin => "not_thin",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// The tail model that decided a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum TailModel {
    /// Every sampled term is zero.
    Vanishing,
    /// The last terms of a finite list are zero.
    EventuallyZero,
    /// `C ρⁿ`.
    Geometric,
    /// `C n^{-p}`.
    Algebraic,
    /// `C n^{-1} (log n)^{-q}`.
    Logarithmic,
    /// `C n^{-1} (log n)^{-1} (log log n)^{-q₂}`.
    DoubleLogarithmic,
    /// No model was decisive.
    Undetermined,
}

/// Fitted tail parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailFit {
    pub model: TailModel,
    /// Per-annulus ratio.
    pub rho: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub q2: Option<f64>,
    /// RMS residual of the deciding regression.
    pub residual: f64,
}

impl TailFit {
    fn bare(model: TailModel) -> Self {
        TailFit {
            model,
            rho: f64::NAN,
            p: None,
            q: None,
            q2: None,
            residual: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub verdict: Verdict,
    pub fit: TailFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassifierSettings {
    /// Band around `ρ = 1`.
    pub epsilon: f64,
    /// Band around `p = 1`, `q = 1`, `q₂ = 1`.
    pub exponent_band: f64,
    /// Exponents this close to 1 count as exactly 1.
    pub exponent_exact: f64,
    /// `s`-range of the geometric fit.
    pub geometric_window: (f64, f64),
    pub geometric_samples: usize,
    /// `ln s`-range of the logarithmic fit.
    pub log_window: (f64, f64),
    pub log_samples: usize,
    /// `|coef|` below this counts as no exponential rate.
    pub coef_tol: f64,
    pub max_residual: f64,
    /// Tail length of the finite-list fit.
    pub tail: usize,
    /// Models within this RSS factor of the best compete.
    pub rss_factor: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            epsilon: 0.02,
            exponent_band: 0.01,
            exponent_exact: 1e-3,
            geometric_window: (1024.0, 16384.0),
            geometric_samples: 64,
            log_window: (1e6f64.ln(), 650.0),
            log_samples: 160,
            coef_tol: 1e-9,
            max_residual: 1e-3,
            tail: 16,
            rss_factor: 10.0,
        }
    }
}

fn rho_verdict(rho: f64, eps: f64) -> Option<Verdict> {
    if rho < 1.0 - eps {
        Some(Verdict::Thin)
    } else if rho > 1.0 + eps {
        Some(Verdict::NotThin)
    } else {
        None
    }
}

/// Thin above 1, NotThin below; inside the band `Some(Inconclusive)` unless
/// the exponent is 1 to within `exact`, in which case the next order decides.
fn exponent_verdict(x: f64, s: &ClassifierSettings) -> Option<Verdict> {
    let gap = x - 1.0;
    if gap > s.exponent_band {
        Some(Verdict::Thin)
    } else if gap < -s.exponent_band {
        Some(Verdict::NotThin)
    } else if gap.abs() > s.exponent_exact {
        Some(Verdict::Inconclusive)
    } else {
        None
    }
}

/// Classify `∫^∞ A(s) ds` from `ln A` in split form.
///
/// `unit` converts `s` to annulus index, so the reported ratio is
/// `e^{σ·unit}` for a fitted rate `σ`: `ln 2` for densities in `s = -ln r`,
/// `1` for sequences indexed by `n` directly.
pub fn classify_density<F: FnMut(f64) -> Result<LogLinear>>(
    mut ln_a: F,
    unit: f64,
    settings: &ClassifierSettings,
) -> Result<Classification> {
    let st = settings;
    let (g0, g1) = st.geometric_window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in logspace(g0, g1, st.geometric_samples) {
        let y = ln_a(s)?.eval(s);
        if y.is_nan() || y == f64::INFINITY {
            return Err(invalid(format!("density is not finite at s = {s}")));
        }
        if y > f64::NEG_INFINITY {
            xs.push(s);
            ys.push(y);
        }
    }
    if xs.len() < st.geometric_samples / 2 {
        return Ok(Classification {
            verdict: Verdict::Thin,
            fit: TailFit::bare(TailModel::Vanishing),
        });
    }
    let rows: Vec<Vec<f64>> = xs.iter().map(|s| vec![1.0, *s, -s.ln()]).collect();
    let geo = least_squares(&rows, &ys).ok_or_else(|| invalid("geometric fit failed"))?;
    let rho = (geo.coefficients[1] * unit).exp();
    if let Some(v) = rho_verdict(rho, st.epsilon) {
        return Ok(Classification {
            verdict: v,
            fit: TailFit {
                model: TailModel::Geometric,
                rho,
                p: Some(geo.coefficients[2]),
                q: None,
                q2: None,
                residual: geo.rms_residual,
            },
        });
    }

    let (v0, v1) = st.log_window;
    let probe = ln_a(v0.exp())?;
    if probe.coef.abs() > st.coef_tol {
        let verdict = if probe.coef < 0.0 { Verdict::Thin } else { Verdict::NotThin };
        return Ok(Classification {
            verdict,
            fit: TailFit {
                model: TailModel::Geometric,
                rho: (probe.coef * unit).exp(),
                p: None,
                q: None,
                q2: None,
                residual: 0.0,
            },
        });
    }
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for v in linspace(v0, v1, st.log_samples) {
        let a = ln_a(v.exp())?;
        if !a.rest.is_finite() || a.coef.abs() > st.coef_tol {
            return Err(invalid(format!("density lost its split form at ln s = {v}")));
        }
        rows.push(vec![1.0, v, v.ln(), v.ln().ln()]);
        ys.push(a.rest + v);
    }
    let fit = least_squares(&rows, &ys).ok_or_else(|| invalid("logarithmic fit failed"))?;
    let p = 1.0 - fit.coefficients[1];
    let q = -fit.coefficients[2];
    let q2 = -fit.coefficients[3];
    let mut out = TailFit {
        model: TailModel::Undetermined,
        rho,
        p: Some(p),
        q: Some(q),
        q2: Some(q2),
        residual: fit.rms_residual,
    };
    if fit.rms_residual > st.max_residual {
        return Ok(Classification {
            verdict: Verdict::Inconclusive,
            fit: out,
        });
    }
    let stages = [
        (p, TailModel::Algebraic),
        (q, TailModel::Logarithmic),
        (q2, TailModel::DoubleLogarithmic),
    ];
    for (x, model) in stages {
        if let Some(v) = exponent_verdict(x, st) {
            out.model = model;
            return Ok(Classification { verdict: v, fit: out });
        }
    }
    Ok(Classification {
        verdict: Verdict::Inconclusive,
        fit: out,
    })
}

/// Classify a sequence given by `ln a_n` in split form in `n`.
pub fn classify_sequence<F: FnMut(f64) -> LogLinear>(
    mut ln_a: F,
    settings: &ClassifierSettings,
) -> Result<Classification> {
    classify_density(|n| Ok(ln_a(n)), 1.0, settings)
}

struct Candidate {
    rss: f64,
    verdict: Verdict,
    fit: TailFit,
}

/// Classify a finite list `a_1..a_N` from its last terms.
///
/// Geometric, algebraic and log-corrected tails are fitted in turn; when
/// models with a comparable residual disagree, the answer is Inconclusive.
pub fn classify_terms(terms: &[f64], settings: &ClassifierSettings) -> Result<Classification> {
    let st = settings;
    if terms.len() < 8 {
        return Err(invalid(format!(
            "need at least 8 terms to classify, got {}",
            terms.len()
        )));
    }
    if terms.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("terms must be finite and nonnegative"));
    }
    let len = st.tail.min(terms.len() / 2).max(4);
    let start = terms.len() - len;
    let tail = &terms[start..];
    if tail.iter().rev().take(4).all(|a| *a == 0.0) {
        return Ok(Classification {
            verdict: Verdict::Thin,
            fit: TailFit::bare(TailModel::EventuallyZero),
        });
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(i, a)| ((start + i + 1) as f64, a.ln()))
        .collect();
    if pts.len() < 4 {
        return Ok(Classification {
            verdict: Verdict::Inconclusive,
            fit: TailFit::bare(TailModel::Undetermined),
        });
    }
    let fit = |basis: &dyn Fn(f64) -> Vec<f64>, shift: &dyn Fn(f64) -> f64| {
        let rows: Vec<Vec<f64>> = pts.iter().map(|(n, _)| basis(*n)).collect();
        let ys: Vec<f64> = pts.iter().map(|(n, y)| y + shift(*n)).collect();
        least_squares(&rows, &ys).map(|f| {
            let rss = f.rms_residual * f.rms_residual * pts.len() as f64;
            (f, rss)
        })
    };
    let none = |_: f64| 0.0;
    let geo = fit(&|n| vec![1.0, n], &none).ok_or_else(|| invalid("geometric fit failed"))?;
    let alg = fit(&|n| vec![1.0, -n.ln()], &none).ok_or_else(|| invalid("algebraic fit failed"))?;
    let log = fit(&|n| vec![1.0, -n.ln().max(1.0).ln()], &|n| n.ln())
        .ok_or_else(|| invalid("log-corrected fit failed"))?;

    let rho = geo.0.coefficients[1].exp();
    let p = alg.0.coefficients[1];
    let q = log.0.coefficients[1];
    let log_verdict = match exponent_verdict(q, st) {
        Some(v) => v,
        None => Verdict::NotThin,
    };
    let alg_verdict = exponent_verdict(p, st).unwrap_or(log_verdict);
    let geo_verdict = rho_verdict(rho, st.epsilon).unwrap_or(alg_verdict);
    let mk = |model, residual: f64| TailFit {
        model,
        rho,
        p: Some(p),
        q: Some(q),
        q2: None,
        residual,
    };
    let rms = |rss: f64| (rss / pts.len() as f64).sqrt();
    let candidates = [
        Candidate {
            rss: geo.1,
            verdict: geo_verdict,
            fit: mk(TailModel::Geometric, rms(geo.1)),
        },
        Candidate {
            rss: alg.1,
            verdict: alg_verdict,
            fit: mk(TailModel::Algebraic, rms(alg.1)),
        },
        Candidate {
            rss: log.1,
            verdict: log_verdict,
            fit: mk(TailModel::Logarithmic, rms(log.1)),
        },
    ];
    let best = candidates
        .iter()
        .min_by(|a, b| a.rss.total_cmp(&b.rss))
        .expect("three candidates");
    let floor = 1e-20 * pts.len() as f64;
    let cutoff = best.rss * st.rss_factor + floor;
    let disagree = candidates
        .iter()
        .any(|c| c.rss <= cutoff && c.verdict != best.verdict);
    Ok(Classification {
        verdict: if disagree { Verdict::Inconclusive } else { best.verdict },
        fit: best.fit,
    })
}

/// Ratio per dyadic annulus for a density in `s = -ln r`.
pub const ANNULUS_UNIT: f64 = LN_2;

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(rho: f64, p: f64, q: f64, q2: f64) -> Verdict {
        if rho != 1.0 {
            return if rho < 1.0 { Verdict::Thin } else { Verdict::NotThin };
        }
        if p != 1.0 {
            return if p > 1.0 { Verdict::Thin } else { Verdict::NotThin };
        }
        if q != 1.0 {
            return if q > 1.0 { Verdict::Thin } else { Verdict::NotThin };
        }
        if q2 > 1.0 {
            Verdict::Thin
        } else {
            Verdict::NotThin
        }
    }

    fn seq(rho: f64, p: f64, q: f64, q2: f64, c: f64) -> impl FnMut(f64) -> LogLinear {
        move |n: f64| {
            let v = n.ln();
            LogLinear::new(rho.ln(), c - p * v - q * v.ln() - q2 * v.ln().ln())
        }
    }

    #[test]
    fn density_battery_of_closed_forms() {
        let st = ClassifierSettings::default();
        let mut cases = Vec::new();
        for rho in [0.3, 0.5, 0.8, 0.9, 0.95, 1.05, 1.1, 1.5, 2.0] {
            for p in [0.0, 1.0, 2.0] {
                cases.push((rho, p, 0.0, 0.0));
            }
        }
        for p in [0.5, 1.5, 2.0] {
            cases.push((1.0, p, 0.0, 0.0));
        }
        for q in [0.5, 1.5] {
            cases.push((1.0, 1.0, q, 0.0));
        }
        for q2 in [0.3, 2.0] {
            cases.push((1.0, 1.0, 1.0, q2));
        }
        for (rho, p, q, q2) in cases {
            let c = classify_sequence(seq(rho, p, q, q2, 0.7), &st).unwrap();
            assert_eq!(c.verdict, truth(rho, p, q, q2), "{rho} {p} {q} {q2}: {c:?}");
        }
    }

    #[test]
    fn band_cases_are_flagged_or_exact() {
        let st = ClassifierSettings::default();
        let c = classify_sequence(seq(1.0, 1.005, 0.0, 0.0, 0.0), &st).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        // a small but exact exponential rate is read off the split form
        let c = classify_sequence(seq(0.995, 0.0, 0.0, 0.0, 0.0), &st).unwrap();
        assert_eq!(c.verdict, Verdict::Thin);
        let c = classify_sequence(seq(1.0, 1.0, 1.0, 1.0, 0.0), &st).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn vanishing_density_is_thin() {
        let c = classify_density(|_| Ok(LogLinear::NEG_INFINITY), LN_2, &Default::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Thin);
        assert_eq!(c.fit.model, TailModel::Vanishing);
    }

    #[test]
    fn finite_lists() {
        let st = ClassifierSettings::default();
        let make = |f: &dyn Fn(f64) -> f64| (1..=36).map(|n| f(n as f64)).collect::<Vec<_>>();
        let cases: Vec<(Vec<f64>, Verdict)> = vec![
            (make(&|n| 0.5f64.powf(n)), Verdict::Thin),
            (make(&|n| 1.3f64.powf(n)), Verdict::NotThin),
            (make(&|_| 2.0), Verdict::NotThin),
            (make(&|n| n.powf(-2.0)), Verdict::Thin),
            (make(&|n| n.powf(-0.5)), Verdict::NotThin),
            (make(&|n| if n > 20.0 { 0.0 } else { 1.0 }), Verdict::Thin),
        ];
        for (terms, want) in cases {
            assert_eq!(classify_terms(&terms, &st).unwrap().verdict, want, "{terms:?}");
        }
        assert!(classify_terms(&[1.0; 5], &st).is_err());
        assert!(classify_terms(&[-1.0; 10], &st).is_err());
    }
}
