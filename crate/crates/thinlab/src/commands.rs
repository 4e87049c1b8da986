//! Subcommand dispatch: each command maps a resolved config to a report
//! and a tidy table.

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use serde_json::{json, Value};

use thinlab_core::bernstein::{check_assumptions, default_grid, BernsteinModel};
use thinlab_core::capacity::{sigma_v_with, CubatureSettings, Weight};
use thinlab_core::geometry::{whitney_decompose, Domain, RegionSet, Window};
use thinlab_core::kernels::{
    free_green_with, green_envelope, green_with, heat_kernel_with, jump_density_with, kappa_x_with,
    killing_density_with, martin_kernel_with, GreenRegime, KernelSettings,
};
use thinlab_core::montecarlo::{simulate_skbm_path, Cell};
use thinlab_core::quad::{gauss_legendre, Tolerance};
use thinlab_core::thinness::{
    aikawa_sum_with, compare_processes_with, default_reference_point, integral_test_with, subgraph_test_with,
    threshold_scan_with, wiener_series_with, Criterion, ScanSettings, ThinnessReport, ThinnessSettings, Verdict,
};

use crate::config::{KernelKind, RunConfig};
use crate::exec::RayonMap;
use crate::report::{num, OutputPaths, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Phi,
    Assume,
    Kernel,
    Green,
    Martin,
    Whitney,
    Energy,
    Thinness,
    Compare,
    Scan,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Phi => "phi",
            Command::Assume => "assume",
            Command::Kernel => "kernel",
            Command::Green => "green",
            Command::Martin => "martin",
            Command::Whitney => "whitney",
            Command::Energy => "energy",
            Command::Thinness => "thinness",
            Command::Compare => "compare",
            Command::Scan => "scan",
            Command::Simulate => "simulate",
        }
    }
}

/// A finished run before it is written out.
pub struct Outcome {
    pub report: Report,
    pub terms: Table,
    /// Further tables written to `<prefix>.<name>.csv`.
    pub extra: Vec<(String, Table)>,
    /// One-line summary for the terminal.
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }

    pub fn write(&self) -> Result<OutputPaths> {
        let prefix = &self.report.config.output.prefix;
        let paths = crate::report::write_outputs(prefix, &self.report, &self.terms)?;
        for (name, t) in &self.extra {
            t.write(&OutputPaths::extra(prefix, name))?;
        }
        Ok(paths)
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn axis_point(d: usize, height: f64) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[d - 1] = height;
    x
}

fn point(given: &Option<Vec<f64>>, fallback: Vec<f64>, name: &str) -> Result<Vec<f64>> {
    let p = given.clone().unwrap_or(fallback);
    if p.iter().any(|v| !v.is_finite()) {
        bail!("point {name} has non-finite coordinates");
    }
    Ok(p)
}

fn kernel_settings(cfg: &RunConfig) -> KernelSettings {
    KernelSettings {
        tol: Tolerance::new(cfg.kernel.abs_tol, cfg.kernel.rel_tol),
        ..KernelSettings::default()
    }
}

/// `[-1, 1]^{d-1} × [0, 2]`.
pub fn default_window(d: usize) -> Window {
    let mut lo = vec![-1.0; d];
    lo[d - 1] = 0.0;
    Window::cube(&lo, 2.0)
}

fn validate_common(cfg: &RunConfig) -> Result<()> {
    cfg.model.validate()?;
    cfg.domain.validate()?;
    Ok(())
}

/// Average of `U^D(x, ·)` over `cell` by a tensor Gauss–Legendre rule.
pub fn green_cell_average(domain: &Domain, model: &BernsteinModel, x: &[f64], cell: &Cell, nodes: usize) -> Result<f64> {
    let d = cell.center.len();
    let (t, w) = gauss_legendre(nodes);
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    loop {
        let mut y = cell.center.clone();
        let mut weight = 1.0;
        for k in 0..d {
            y[k] += 0.5 * cell.side * t[idx[k]];
            weight *= 0.5 * w[idx[k]];
        }
        total += weight * green_with(domain, model, x, &y, &KernelSettings::default())?.value;
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    Ok(total)
}

pub fn execute(cmd: Command, cfg: &RunConfig, exec: &RayonMap) -> Result<Outcome> {
    validate_common(cfg)?;
    let out = match cmd {
        Command::Phi => phi(cfg),
        Command::Assume => assume(cfg),
        Command::Kernel => kernel(cfg),
        Command::Green => green(cfg),
        Command::Martin => martin(cfg),
        Command::Whitney => whitney(cfg),
        Command::Energy => energy(cfg),
        Command::Thinness => thinness(cfg, exec),
        Command::Compare => compare(cfg, exec),
        Command::Scan => scan(cfg, exec),
        Command::Simulate => simulate(cfg, exec),
    }?;
    Ok(out)
}

struct Parts {
    result: Value,
    terms: Table,
    extra: Vec<(String, Table)>,
    verdict: Option<Verdict>,
    summary: String,
}

fn finish(cmd: Command, cfg: &RunConfig, p: Parts) -> Outcome {
    let mut report = Report::new(cmd.name(), cfg, p.result);
    report.verdict = p.verdict;
    report.exit_code = match (cmd, p.verdict) {
        (Command::Thinness, Some(v)) => v.exit_code(),
        _ => 0,
    };
    Outcome {
        report,
        terms: p.terms,
        extra: p.extra,
        summary: p.summary,
    }
}

fn phi(cfg: &RunConfig) -> Result<Outcome> {
    let m = &cfg.model;
    let mut t = Table::new(&["lambda", "phi", "phi_prime", "u", "mu"]);
    let mut rows = Vec::new();
    for &l in &cfg.phi.lambdas {
        let p = m.phi(l)?;
        let dp = m.phi_prime(l)?;
        let (u, mu) = (m.u(l), m.mu(l));
        t.push([num(l), num(p), num(dp), num(u), num(mu)]);
        rows.push(json!({"lambda": l, "phi": p, "phi_prime": dp, "u": u, "mu": mu}));
    }
    let summary = format!("{}: {} points", m.name(), rows.len());
    Ok(finish(
        Command::Phi,
        cfg,
        Parts {
            result: json!({"model": m.name(), "exact_densities": m.has_exact_densities(), "values": rows}),
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn assume(cfg: &RunConfig) -> Result<Outcome> {
    let grid = default_grid();
    let r = check_assumptions(&cfg.model, &grid, &grid)?;
    let flags = [
        ("A1", r.a1),
        ("A2", r.a2),
        ("A3", r.a3),
        ("A4", r.a4),
        ("A5", r.a5),
        ("A6", r.a6),
        ("H1", r.h1),
        ("H2", r.h2),
    ];
    let mut t = Table::new(&["assumption", "passed"]);
    for (name, f) in flags {
        t.push([name.to_string(), f.passed().to_string()]);
    }
    let failed: Vec<&str> = flags.iter().filter(|(_, f)| !f.passed()).map(|(n, _)| *n).collect();
    let summary = if failed.is_empty() {
        "all assumptions pass on the grid".to_string()
    } else {
        format!("failing: {}", failed.join(", "))
    };
    Ok(finish(
        Command::Assume,
        cfg,
        Parts {
            result: to_value(&r)?,
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn kernel(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let ks = kernel_settings(cfg);
    let x = point(&cfg.points.x, axis_point(d, 1.0), "x")?;
    let y = point(&cfg.points.y, axis_point(d, 2.0), "y")?;
    let (dom, m) = (&cfg.domain, &cfg.model);
    let v = match cfg.kernel.kind {
        KernelKind::Heat => heat_kernel_with(dom, cfg.kernel.t, &x, &y, ks.heat)?,
        KernelKind::Green => green_with(dom, m, &x, &y, &ks)?,
        KernelKind::FreeGreen => free_green_with(m, &x, &y, &ks)?,
        KernelKind::Jump => jump_density_with(dom, m, &x, &y, &ks)?,
        KernelKind::Killing => killing_density_with(dom, m, &x, &ks)?,
        KernelKind::KappaX => kappa_x_with(dom, m, &x, &ks)?,
    };
    let two_point = !matches!(cfg.kernel.kind, KernelKind::Killing | KernelKind::KappaX);
    let mut t = Table::new(&["kind", "value", "abs_error", "envelope_lower", "envelope_upper"]);
    let (lo, hi) = v.envelope.unwrap_or((f64::NAN, f64::NAN));
    t.push([
        format!("{:?}", cfg.kernel.kind).to_lowercase(),
        num(v.value),
        num(v.abs_error),
        num(lo),
        num(hi),
    ]);
    let summary = format!("{:?} = {:e} ± {:e}", cfg.kernel.kind, v.value, v.abs_error);
    Ok(finish(
        Command::Kernel,
        cfg,
        Parts {
            result: json!({
                "kind": cfg.kernel.kind,
                "x": x,
                "y": if two_point { Some(&y) } else { None },
                "value": to_value(&v)?,
            }),
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn green(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let ks = kernel_settings(cfg);
    let x = point(&cfg.points.x, axis_point(d, 1.0), "x")?;
    let y = point(&cfg.points.y, axis_point(d, 2.0), "y")?;
    let g = green_with(&cfg.domain, &cfg.model, &x, &y, &ks)?;
    let free = free_green_with(&cfg.model, &x, &y, &ks).ok();
    let env = green_envelope(GreenRegime::AboveGraph, &cfg.domain, &cfg.model, &x, &y).ok();
    let mut t = Table::new(&["quantity", "value", "abs_error"]);
    t.push(["green".to_string(), num(g.value), num(g.abs_error)]);
    if let Some(f) = &free {
        t.push(["free_green".to_string(), num(f.value), num(f.abs_error)]);
    }
    if let Some(e) = &env {
        t.push(["envelope_lower".to_string(), num(e.lower), String::new()]);
        t.push(["envelope_upper".to_string(), num(e.upper), String::new()]);
    }
    let summary = format!("U^D = {:e} ± {:e}", g.value, g.abs_error);
    Ok(finish(
        Command::Green,
        cfg,
        Parts {
            result: json!({
                "x": x,
                "y": y,
                "green": to_value(&g)?,
                "free_green": to_value(&free)?,
                "global_envelope": to_value(&env)?,
            }),
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn martin(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let mut xd = axis_point(d, 1.0);
    xd[0] = 0.5;
    let x = point(&cfg.points.x, xd, "x")?;
    let z = point(&cfg.points.z, vec![0.0; d], "z")?;
    let x0 = point(&cfg.points.x0, axis_point(d, 1.0), "x0")?;
    let mv = martin_kernel_with(&cfg.domain, &cfg.model, &x, &z, &x0, &kernel_settings(cfg))?;
    let mut t = Table::new(&["j", "ratio"]);
    for (k, r) in mv.ratios.iter().enumerate() {
        t.push([(k + thinlab_core::kernels::LADDER.0 as usize).to_string(), num(*r)]);
    }
    let summary = format!("M = {:e} (residual {:e})", mv.value, mv.extrapolation_residual);
    Ok(finish(
        Command::Martin,
        cfg,
        Parts {
            result: json!({"x": x, "z": z, "x0": x0, "martin": to_value(&mv)?}),
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn whitney(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let window = cfg.whitney.window.clone().unwrap_or_else(|| default_window(d));
    let w = whitney_decompose(&cfg.domain, &window, cfg.whitney.max_generation)?;
    let mut header: Vec<String> = vec!["k".into()];
    header.extend((0..d).map(|i| format!("corner_{i}")));
    header.extend(["side", "diam", "dist", "rim"].map(String::from));
    let mut t = Table::new(&header);
    let mut whitney_ok = 0usize;
    for c in &w.cubes {
        if c.diam <= c.dist && c.dist <= 4.0 * c.diam {
            whitney_ok += 1;
        }
        let mut row = vec![c.generation.to_string()];
        row.extend(c.corner.iter().map(|v| num(*v)));
        row.extend([num(c.side), num(c.diam), num(c.dist), c.rim.to_string()]);
        t.push(row);
    }
    let interior = w.interior_cubes().count();
    let summary = format!("{} cubes ({} off the rim)", w.cubes.len(), interior);
    Ok(finish(
        Command::Whitney,
        cfg,
        Parts {
            result: json!({
                "window": to_value(&window)?,
                "max_generation": w.max_generation,
                "cubes": w.cubes.len(),
                "interior_cubes": interior,
                "whitney_property_holds": whitney_ok == w.cubes.len(),
            }),
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn energy(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let window = match (&cfg.energy.window, &cfg.set) {
        (Some(w), _) => Some(w.clone()),
        (None, RegionSet::CubeUnion { .. } | RegionSet::Empty) => None,
        (None, _) => Some(default_window(d)),
    };
    let e = sigma_v_with(
        &cfg.domain,
        &cfg.model,
        &cfg.set,
        &cfg.energy.weight,
        window.as_ref(),
        &CubatureSettings::default(),
    )?;
    let mut t = Table::new(&["cube", "term"]);
    if let Some(terms) = &e.cube_terms {
        for (i, v) in terms.iter().enumerate() {
            t.push([i.to_string(), num(*v)]);
        }
    }
    let summary = if e.value.is_finite() {
        format!("sigma_v = {:e} ± {:e}", e.value, e.abs_error)
    } else {
        "sigma_v = +inf (not integrable up to the boundary)".to_string()
    };
    Ok(finish(
        Command::Energy,
        cfg,
        Parts {
            result: json!({"window": to_value(&window)?, "energy": to_value(&e)?, "value_text": num(e.value)}),
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn default_criterion(cfg: &RunConfig) -> Criterion {
    let model = cfg.model;
    if cfg.set.profile().is_some() {
        Criterion::SubgraphSkbm { model }
    } else {
        Criterion::SkbmIntegral { model }
    }
}

fn terms_table(reports: &[(&str, &ThinnessReport)]) -> Table {
    let mut t = Table::new(&["criterion", "n", "a_n", "partial_sum"]);
    for (name, r) in reports {
        let mut s = 0.0;
        for (i, a) in r.terms.iter().enumerate() {
            s += a;
            t.push([name.to_string(), (i + 1).to_string(), num(*a), num(s)]);
        }
    }
    t
}

/// Run one criterion on the configured set.
pub fn run_criterion(
    cfg: &RunConfig,
    criterion: &Criterion,
    z: &[f64],
    st: &ThinnessSettings,
    exec: &RayonMap,
) -> Result<ThinnessReport> {
    let (dom, set, n) = (&cfg.domain, &cfg.set, cfg.thinness.n_max);
    let r = match criterion {
        c if c.is_subgraph() => {
            let profile = set
                .profile()
                .ok_or_else(|| anyhow!("{} needs a subgraph set, got {}", c.name(), set.name()))?;
            if !matches!(dom, Domain::HalfSpace { .. }) {
                bail!("subgraph criteria live in the half-space");
            }
            if z.iter().any(|v| *v != 0.0) {
                bail!("subgraph sets are anchored at the origin");
            }
            subgraph_test_with(&profile, c, dom.dim(), n, st, exec)?
        }
        Criterion::SkbmWiener { model } => {
            let v = cfg.thinness.weight.clone().unwrap_or_else(|| Weight::GreenCapped {
                x0: cfg.points.x0.clone().unwrap_or_else(|| default_reference_point(z)),
            });
            wiener_series_with(dom, model, set, z, &v, n, st, exec)?
        }
        Criterion::SkbmAikawa { model } => aikawa_sum_with(dom, model, set, z, n, st)?,
        c => integral_test_with(dom, c, set, z, n, st, exec)?,
    };
    Ok(r)
}

fn thinness(cfg: &RunConfig, exec: &RayonMap) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let z = point(&cfg.points.z, vec![0.0; d], "z")?;
    let c = cfg.thinness.criterion.unwrap_or_else(|| default_criterion(cfg));
    let r = run_criterion(cfg, &c, &z, &ThinnessSettings::default(), exec)?;
    let summary = format!("{} on {}: {}", c.name(), r.set, r.verdict.name());
    Ok(finish(
        Command::Thinness,
        cfg,
        Parts {
            terms: terms_table(&[(c.name(), &r)]),
            verdict: Some(r.verdict),
            result: to_value(&r)?,
            extra: vec![],
            summary,
        },
    ))
}

fn compare(cfg: &RunConfig, exec: &RayonMap) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let z = point(&cfg.points.z, vec![0.0; d], "z")?;
    let st = ThinnessSettings::default();
    let c = compare_processes_with(&cfg.domain, &cfg.set, cfg.compare.alpha, &z, cfg.thinness.n_max, &st, exec)?;
    let mut parts: Vec<(&str, &ThinnessReport)> = Vec::new();
    if let Some(r) = &c.censored {
        parts.push(("censored", r));
    }
    parts.push(("killed_stable", &c.killed_stable));
    parts.push(("skbm", &c.skbm));
    let v = c.verdicts();
    let summary = format!(
        "censored {}, killed stable {}, subordinate {}",
        v.0.map(|x| x.name()).unwrap_or("n/a"),
        v.1.name(),
        v.2.name()
    );
    Ok(finish(
        Command::Compare,
        cfg,
        Parts {
            terms: terms_table(&parts),
            result: to_value(&c)?,
            verdict: None,
            extra: vec![],
            summary,
        },
    ))
}

fn scan(cfg: &RunConfig, exec: &RayonMap) -> Result<Outcome> {
    let s = &cfg.scan;
    let criterion = s.criterion.unwrap_or(Criterion::SubgraphSkbm { model: cfg.model });
    let settings = ScanSettings {
        resolution: s.resolution,
        sweep: s.sweep,
        dimension: cfg.domain.dim(),
        n_max: s.n_max,
    };
    let table = threshold_scan_with(
        s.family,
        (s.range[0], s.range[1]),
        &criterion,
        &settings,
        &ThinnessSettings::default(),
        exec,
    )?;
    let mut t = Table::new(&["param", "verdict"]);
    for r in &table.rows {
        t.push([num(r.param), r.verdict.name().to_string()]);
    }
    let summary = match table.bracket {
        Some((a, b)) => format!("transition in [{a}, {b}]"),
        None => "no transition in range".to_string(),
    };
    Ok(finish(
        Command::Scan,
        cfg,
        Parts {
            result: to_value(&table)?,
            terms: t,
            extra: vec![],
            verdict: None,
            summary,
        },
    ))
}

fn simulate(cfg: &RunConfig, exec: &RayonMap) -> Result<Outcome> {
    let d = cfg.domain.dim();
    let sc = cfg.simulate.sim_config(cfg.seed);
    let x = point(&cfg.points.x, axis_point(d, 1.0), "x")?;
    let cell = &cfg.simulate.cell;
    let est = exec.green_mc(&cfg.domain, &cfg.model, &x, cell, &sc)?;
    let quad = green_cell_average(&cfg.domain, &cfg.model, &x, cell, 3).ok();
    let z_score = quad.map(|q| (est.value - q) / est.std_error);
    let mut t = Table::new(&["quantity", "value"]);
    t.push(["estimate".to_string(), num(est.value)]);
    t.push(["std_error".to_string(), num(est.std_error)]);
    t.push(["tail_bound".to_string(), num(est.tail_bound)]);
    if let Some(q) = quad {
        t.push(["quadrature_cell_average".to_string(), num(q)]);
    }
    let mut extra = Vec::new();
    if cfg.simulate.dump_paths > 0 {
        let mut header: Vec<String> = vec!["path".into(), "k".into(), "s".into()];
        header.extend((0..d).map(|i| format!("x_{i}")));
        header.push("alive".into());
        let mut pt = Table::new(&header);
        for i in 0..cfg.simulate.dump_paths {
            let p = simulate_skbm_path(&cfg.domain, &cfg.model, &x, &sc, i as u64)?;
            for (k, (s, y)) in p.subordinator.iter().zip(&p.positions).enumerate() {
                let mut row = vec![i.to_string(), k.to_string(), num(*s)];
                row.extend(y.iter().map(|v| num(*v)));
                row.push("true".into());
                pt.push(row);
            }
            if let Some(k) = p.lifetime {
                let mut row = vec![i.to_string(), k.to_string(), String::new()];
                row.extend((0..d).map(|_| String::new()));
                row.push("false".into());
                pt.push(row);
            }
        }
        extra.push(("paths".to_string(), pt));
    }
    let summary = match quad {
        Some(q) => format!("MC {:e} ± {:e}, quadrature {:e}", est.value, est.std_error, q),
        None => format!("MC {:e} ± {:e}", est.value, est.std_error),
    };
    Ok(finish(
        Command::Simulate,
        cfg,
        Parts {
            result: json!({
                "x": x,
                "estimate": to_value(&est)?,
                "tail_fraction": est.tail_bound / est.value,
                "quadrature_cell_average": quad,
                "z_score": z_score,
            }),
            terms: t,
            extra,
            verdict: None,
            summary,
        },
    ))
}
