//! Run records: `<prefix>.report.json` and the tidy `<prefix>.terms.csv`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use thinlab_core::thinness::Verdict;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    pub seed: u64,
    pub exit_code: i32,
    pub verdict: Option<Verdict>,
    /// The fully resolved configuration.
    pub config: RunConfig,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, result: serde_json::Value) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seed: config.seed,
            exit_code: 0,
            verdict: None,
            config: config.clone(),
            result,
        }
    }

    /// The payload without its timestamp, for determinism checks.
    pub fn without_timestamp(&self) -> Report {
        Report {
            timestamp: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).context("report is not valid JSON for this schema")
    }
}

/// A header plus rows of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Format a float for CSV, with `+inf` for the diagonal sentinel.
pub fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}

pub struct OutputPaths {
    pub report: PathBuf,
    pub terms: PathBuf,
}

impl OutputPaths {
    pub fn new(prefix: &str) -> Self {
        OutputPaths {
            report: PathBuf::from(format!("{prefix}.report.json")),
            terms: PathBuf::from(format!("{prefix}.terms.csv")),
        }
    }

    pub fn extra(prefix: &str, name: &str) -> PathBuf {
        PathBuf::from(format!("{prefix}.{name}.csv"))
    }
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    Ok(())
}

pub fn write_outputs(prefix: &str, report: &Report, terms: &Table) -> Result<OutputPaths> {
    let paths = OutputPaths::new(prefix);
    ensure_parent(&paths.report)?;
    std::fs::write(&paths.report, report.to_json()? + "\n")
        .with_context(|| format!("cannot write {}", paths.report.display()))?;
    terms.write(&paths.terms)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let cfg = RunConfig::default();
        let mut r = Report::new("phi", &cfg, serde_json::json!({"values": [1.0, 0.1, 1e-300]}));
        r.verdict = Some(Verdict::Inconclusive);
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn infinite_values_are_spelled_out() {
        assert_eq!(num(f64::INFINITY), "+inf");
        assert_eq!(num(0.5), "5e-1");
    }
}
