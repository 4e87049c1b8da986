//! Run configuration: one TOML file per run, overridden by dotted keys.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use thinlab_core::bernstein::BernsteinModel;
use thinlab_core::capacity::Weight;
use thinlab_core::geometry::{Domain, RegionSet, Window};
use thinlab_core::montecarlo::{Cell, SimConfig};
use thinlab_core::thinness::{Criterion, ScanFamily, ScanSettings, DEFAULT_N_MAX};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; `THINLAB_THREADS` takes precedence.
    pub threads: Option<usize>,
    pub output: OutputConfig,
    pub model: BernsteinModel,
    pub domain: Domain,
    pub set: RegionSet,
    pub points: Points,
    pub phi: PhiConfig,
    pub kernel: KernelConfig,
    pub whitney: WhitneyConfig,
    pub energy: EnergyConfig,
    pub thinness: ThinnessConfig,
    pub compare: CompareConfig,
    pub scan: ScanConfig,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0x5eed,
            threads: None,
            output: OutputConfig::default(),
            model: BernsteinModel::stable(1.0),
            domain: Domain::half_space(3),
            set: RegionSet::PowerLaw { gamma: 2.0 },
            points: Points::default(),
            phi: PhiConfig::default(),
            kernel: KernelConfig::default(),
            whitney: WhitneyConfig::default(),
            energy: EnergyConfig::default(),
            thinness: ThinnessConfig::default(),
            compare: CompareConfig::default(),
            scan: ScanConfig::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Outputs go to `<prefix>.report.json` and `<prefix>.terms.csv`.
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            prefix: "thinlab".into(),
        }
    }
}

/// Points shared by the kernel commands. Missing points take
/// command-specific defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Points {
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    /// Boundary point.
    pub z: Option<Vec<f64>>,
    /// Base point of the Martin kernel and the Green weight.
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiConfig {
    pub lambdas: Vec<f64>,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig {
            lambdas: (-6..=6).map(|k| 10f64.powi(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Heat,
    Green,
    FreeGreen,
    Jump,
    Killing,
    KappaX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Time of the heat kernel.
    pub t: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            kind: KernelKind::Green,
            t: 1.0,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhitneyConfig {
    /// Defaults to `[-1, 1]^{d-1} × [0, 2]`.
    pub window: Option<Window>,
    pub max_generation: u32,
}

impl Default for WhitneyConfig {
    fn default() -> Self {
        WhitneyConfig {
            window: None,
            max_generation: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub weight: Weight,
    /// Clipping window; subgraph sets default to the Whitney window.
    pub window: Option<Window>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            weight: Weight::One,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThinnessConfig {
    /// Defaults to the subgraph criterion of `model` for profile sets and the
    /// integral criterion for cube unions.
    pub criterion: Option<Criterion>,
    pub n_max: u32,
    /// Weight of the Wiener series; defaults to the capped Green weight.
    pub weight: Option<Weight>,
}

impl Default for ThinnessConfig {
    fn default() -> Self {
        ThinnessConfig {
            criterion: None,
            n_max: DEFAULT_N_MAX,
            weight: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub alpha: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { alpha: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub family: ScanFamily,
    pub range: [f64; 2],
    /// Defaults to the subgraph criterion of `model`.
    pub criterion: Option<Criterion>,
    pub resolution: f64,
    pub sweep: usize,
    pub n_max: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let s = ScanSettings::default();
        ScanConfig {
            family: ScanFamily::PowerLaw,
            range: [1.0, 2.0],
            criterion: None,
            resolution: s.resolution,
            sweep: s.sweep,
            n_max: s.n_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub h: f64,
    pub horizon: f64,
    pub paths: usize,
    pub batches: usize,
    pub killing: bool,
    pub cell: Cell,
    /// Paths written to `<prefix>.paths.csv`.
    pub dump_paths: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let s = SimConfig::default();
        SimulateConfig {
            h: s.h,
            horizon: s.horizon,
            paths: 10_000,
            batches: s.batches,
            killing: s.killing,
            cell: Cell {
                center: vec![0.0, 0.0, 2.0],
                side: 0.25,
            },
            dump_paths: 0,
        }
    }
}

impl SimulateConfig {
    pub fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            h: self.h,
            horizon: self.horizon,
            paths: self.paths,
            seed,
            batches: self.batches,
            killing: self.killing,
        }
    }
}

/// Parse the right-hand side of `key=value`: TOML literals where they
/// parse, bare strings otherwise.
pub fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Set the dotted `key` in `table`. Missing intermediate tables are copied
/// from `defaults` when present there, so a tagged section keeps its `kind`.
pub fn apply_override(table: &mut toml::Table, defaults: &toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("bad override key `{key}`");
    }
    let mut cur = table;
    let mut def = Some(defaults);
    for p in &parts[..parts.len() - 1] {
        let seed = def.and_then(|d| d.get(*p)).filter(|v| v.is_table()).cloned();
        def = def.and_then(|d| d.get(*p)).and_then(|v| v.as_table());
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| seed.unwrap_or_else(|| toml::Value::Table(toml::Table::new())));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{p}` is not a table"))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Build a config from TOML text plus overrides.
pub fn resolve(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().context("config is not valid TOML")?;
    let defaults = toml::Table::try_from(RunConfig::default()).context("default config does not serialize")?;
    for o in overrides {
        apply_override(&mut table, &defaults, o)?;
    }
    let cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .context("config does not match the run schema")?;
    Ok(cfg)
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        None => String::new(),
    };
    resolve(&text, overrides)
}
