//! Parallel drivers over the core's sequential primitives.
//!
//! Results are always collected in index order and folded sequentially, so
//! outputs do not depend on the number of workers.

use anyhow::{Context, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

use thinlab_core::bernstein::BernsteinModel;
use thinlab_core::geometry::Domain;
use thinlab_core::montecarlo::{estimate_green_mc_range, Cell, GreenMCEstimate, PartialEstimate, SimConfig};
use thinlab_core::thinness::TermMap;

pub const THREADS_ENV: &str = "THINLAB_THREADS";

/// `THINLAB_THREADS`, then the configured count, then the hardware.
pub fn resolve_threads(configured: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
        return Ok(n.max(1));
    }
    if let Some(n) = configured {
        return Ok(n.max(1));
    }
    Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// A private rayon pool.
pub struct RayonMap {
    pool: ThreadPool,
}

impl RayonMap {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .context("cannot start the worker pool")?;
        Ok(RayonMap { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f` over `items` in parallel, results in input order.
    pub fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    /// Occupation estimate with one task per batch.
    pub fn green_mc(
        &self,
        domain: &Domain,
        model: &BernsteinModel,
        x: &[f64],
        cell: &Cell,
        config: &SimConfig,
    ) -> thinlab_core::Result<GreenMCEstimate> {
        config.validate()?;
        let b = config.batches;
        let ranges: Vec<std::ops::Range<usize>> = (0..b)
            .map(|k| {
                let lo = (k * config.paths).div_ceil(b);
                let hi = ((k + 1) * config.paths).div_ceil(b);
                lo..hi
            })
            .collect();
        let parts: Vec<thinlab_core::Result<PartialEstimate>> =
            self.map(&ranges, |r| estimate_green_mc_range(domain, model, x, cell, config, r.clone()));
        let mut acc: Option<PartialEstimate> = None;
        for p in parts {
            let p = p?;
            acc = Some(match acc {
                None => p,
                Some(a) => a.merge(p),
            });
        }
        acc.expect("at least one batch").finish(config)
    }
}

impl TermMap for RayonMap {
    fn map_terms(
        &self,
        ns: &[u32],
        f: &(dyn Fn(u32) -> thinlab_core::Result<f64> + Sync),
    ) -> Vec<thinlab_core::Result<f64>> {
        self.map(ns, |n| f(*n))
    }
}
