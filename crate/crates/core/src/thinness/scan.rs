//! Bisection over one-parameter families of sets.

use alloc::format;
use alloc::vec::Vec;

use super::{integral_test_with, subgraph_test_with, Criterion, Sequential, TermMap, ThinnessSettings, Verdict};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Domain, Profile, RegionSet};
use crate::math::linspace;

/// A family of subgraph profiles indexed by one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum ScanFamily {
    /// `ρ^γ`, parameter `γ ≥ 1`.
    PowerLaw,
    /// Log-corrected profile of the given level, parameter `β ≥ 0`.
    LogCorrected { level: u32 },
}

impl ScanFamily {
    pub fn profile(&self, param: f64) -> Profile {
        match *self {
            ScanFamily::PowerLaw => Profile::power(param),
            ScanFamily::LogCorrected { level } => Profile::LogCorrected { beta: param, level },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanSettings {
    /// Target width of the transition bracket.
    pub resolution: f64,
    /// Points of the initial monotonicity sweep.
    pub sweep: usize,
    pub dimension: usize,
    /// Annuli per report.
    pub n_max: u32,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            resolution: 0.02,
            sweep: 11,
            dimension: 3,
            n_max: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanRow {
    pub param: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanTable {
    pub family: ScanFamily,
    pub criterion: Criterion,
    /// Every evaluated parameter, sorted.
    pub rows: Vec<ScanRow>,
    /// Last parameter with the low-end verdict and first with the high-end
    /// verdict, when the verdict changes over the range.
    pub bracket: Option<(f64, f64)>,
    /// Extent of Inconclusive parameters inside the bracket.
    pub inconclusive_band: Option<(f64, f64)>,
}

/// Bracket the Thin/NotThin transition of `family` over `range`.
pub fn threshold_scan(family: ScanFamily, range: (f64, f64), criterion: &Criterion) -> Result<ScanTable> {
    threshold_scan_with(
        family,
        range,
        criterion,
        &ScanSettings::default(),
        &ThinnessSettings::default(),
        &Sequential,
    )
}

/// Decisive verdicts may change at most once, with Inconclusive ones only
/// between the two sides.
fn check_monotone(rows: &[ScanRow]) -> Result<()> {
    let mut current: Option<Verdict> = None;
    let mut switched = false;
    let mut gap = false;
    for r in rows {
        let v = r.verdict;
        match current {
            _ if v == Verdict::Inconclusive => {
                if switched {
                    return Err(Error::NonMonotone(format!("inconclusive verdict past the transition at {}", r.param)));
                }
                gap = current.is_some();
            }
            None => current = Some(v),
            Some(c) if c == v => {
                if gap {
                    return Err(Error::NonMonotone(format!("verdict {} recurs at {}", v.name(), r.param)));
                }
            }
            Some(_) => {
                if switched {
                    return Err(Error::NonMonotone(format!("second change of verdict at {}", r.param)));
                }
                switched = true;
                gap = false;
                current = Some(v);
            }
        }
    }
    Ok(())
}

pub fn threshold_scan_with(
    family: ScanFamily,
    range: (f64, f64),
    criterion: &Criterion,
    scan: &ScanSettings,
    st: &ThinnessSettings,
    exec: &dyn TermMap,
) -> Result<ScanTable> {
    let (lo, hi) = range;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(invalid(format!("bad parameter range [{lo}, {hi}]")));
    }
    if !(scan.resolution > 0.0) || scan.sweep < 2 {
        return Err(invalid("scan needs a positive resolution and at least two sweep points"));
    }
    let d = scan.dimension;
    criterion.validate(d)?;
    let domain = Domain::half_space(d);
    let origin = alloc::vec![0.0; d];
    let verdict = |param: f64| -> Result<Verdict> {
        let profile = family.profile(param);
        let report = if criterion.is_subgraph() {
            subgraph_test_with(&profile, criterion, d, scan.n_max, st, exec)?
        } else {
            let set = RegionSet::Subgraph { profile };
            integral_test_with(&domain, criterion, &set, &origin, scan.n_max, st, exec)?
        };
        Ok(report.verdict)
    };
    let mut rows = Vec::new();
    for p in linspace(lo, hi, scan.sweep) {
        rows.push(ScanRow { param: p, verdict: verdict(p)? });
    }
    check_monotone(&rows)?;
    let decisive: Vec<&ScanRow> = rows.iter().filter(|r| r.verdict.is_decisive()).collect();
    let (low_side, high_side) = match (decisive.first(), decisive.last()) {
        (Some(a), Some(b)) if a.verdict != b.verdict => (a.verdict, b.verdict),
        _ => {
            return Ok(ScanTable {
                family,
                criterion: *criterion,
                rows,
                bracket: None,
                inconclusive_band: None,
            })
        }
    };
    let last_low = |rows: &[ScanRow]| {
        rows.iter()
            .filter(|r| r.verdict == low_side)
            .map(|r| r.param)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let first_high = |rows: &[ScanRow]| {
        rows.iter()
            .filter(|r| r.verdict == high_side)
            .map(|r| r.param)
            .fold(f64::INFINITY, f64::min)
    };
    // refine each edge: low side against its right neighbour, high side
    // against its left neighbour
    loop {
        rows.sort_by(|a, b| a.param.total_cmp(&b.param));
        let a = last_low(&rows);
        let b = first_high(&rows);
        let next_after_a = rows.iter().find(|r| r.param > a).map(|r| r.param).unwrap_or(b);
        let prev_before_b = rows.iter().rev().find(|r| r.param < b).map(|r| r.param).unwrap_or(a);
        let mut probes = Vec::new();
        if next_after_a - a > scan.resolution {
            probes.push(0.5 * (a + next_after_a));
        }
        if b - prev_before_b > scan.resolution && prev_before_b > a {
            probes.push(0.5 * (prev_before_b + b));
        }
        if probes.is_empty() {
            break;
        }
        for p in probes {
            if rows.iter().any(|r| r.param == p) {
                continue;
            }
            rows.push(ScanRow { param: p, verdict: verdict(p)? });
        }
    }
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    check_monotone(&rows)?;
    let a = last_low(&rows);
    let b = first_high(&rows);
    let inc: Vec<f64> = rows
        .iter()
        .filter(|r| r.param > a && r.param < b && r.verdict == Verdict::Inconclusive)
        .map(|r| r.param)
        .collect();
    let band = match (inc.first(), inc.last()) {
        (Some(x), Some(y)) => Some((*x, *y)),
        _ => None,
    };
    Ok(ScanTable {
        family,
        criterion: *criterion,
        rows,
        bracket: Some((a, b)),
        inconclusive_band: band,
    })
}
