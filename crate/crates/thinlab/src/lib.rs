//! Standard-library companion to `thinlab-core`.
//!
//! Adds what the numerical core deliberately leaves out: TOML run
//! configurations with dotted overrides, JSON and CSV outputs, a rayon
//! worker pool behind the core's [`TermMap`](thinlab_core::thinness::TermMap)
//! hook, and the `thinlab` command-line front end.

pub mod commands;
pub mod config;
pub mod exec;
pub mod report;

pub use thinlab_core;

use std::path::Path;

use anyhow::Result;

pub use commands::{execute, Command, Outcome};
pub use config::RunConfig;
pub use exec::RayonMap;
pub use report::Report;

/// Exit status for failures of any kind.
pub const EXIT_ERROR: i32 = 3;

/// Resolve the config, run `cmd` and write its outputs.
pub fn run(cmd: Command, config: Option<&Path>, overrides: &[String]) -> Result<Outcome> {
    let cfg = config::load(config, overrides)?;
    let threads = exec::resolve_threads(cfg.threads)?;
    let pool = RayonMap::new(threads)?;
    let out = execute(cmd, &cfg, &pool)?;
    out.write()?;
    Ok(out)
}
