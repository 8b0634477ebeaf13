//! Experiment orchestration for the duality checks: configurations, suites,
//! reports and replay of failing cases.

pub mod config;
pub mod duality_report;
pub mod report;
pub mod suites;

use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;

pub use config::ExperimentConfig;
pub use report::{emit_report, Format, Report};
pub use suites::{replay, run_suite, ReplayCase, SuiteResult, SUITES};

/// Thread pool honoring `LPDL_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LPDL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("LPDL_THREADS=`{v}` is not a positive integer"))?;
        b = b.num_threads(n.max(1));
    }
    Ok(b.build()?)
}

/// Run the named suites in parallel; results keep the order of `suites`.
pub fn run_suites(cfg: &ExperimentConfig, suites: &[String]) -> Result<Report> {
    cfg.validate()?;
    for s in suites {
        if !SUITES.contains(&s.as_str()) {
            anyhow::bail!("unknown suite `{s}`; available suites: {}", SUITES.join(", "));
        }
    }
    let start = Instant::now();
    let pool = thread_pool()?;
    let results: Vec<SuiteResult> =
        pool.install(|| suites.par_iter().map(|s| run_suite(cfg, s)).collect::<Result<Vec<_>>>())?;
    Ok(Report::new(Some(cfg.clone()), results, start.elapsed().as_millis() as u64))
}
