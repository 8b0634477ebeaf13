//! Report assembly and rendering (JSON, CSV, Markdown).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::suites::SuiteResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub generated_at: String,
    pub config: Option<ExperimentConfig>,
    pub passed: bool,
    pub suites: usize,
    pub failed_suites: usize,
    pub wall_time_ms: u64,
    pub results: Vec<SuiteResult>,
}

impl Report {
    pub fn new(config: Option<ExperimentConfig>, results: Vec<SuiteResult>, wall_time_ms: u64) -> Self {
        let failed_suites = results.iter().filter(|r| !r.passed).count();
        Self {
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            passed: failed_suites == 0,
            suites: results.len(),
            failed_suites,
            wall_time_ms,
            results,
        }
    }
}

fn fmt_p(p: &[f64]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn fmt_metrics(r: &SuiteResult) -> String {
    r.metrics
        .iter()
        .map(|(k, v)| format!("{k}={v:.3e}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn render_json(report: &Report) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// One row per suite result.
pub fn render_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "suite", "group", "n", "action", "p", "passed", "checks", "failures", "metrics", "wall_time_ms",
    ])?;
    for r in &report.results {
        w.write_record([
            r.suite.clone(),
            r.group.clone(),
            r.n.to_string(),
            r.action.clone(),
            fmt_p(&r.p),
            r.passed.to_string(),
            r.checks.to_string(),
            r.failures.len().to_string(),
            fmt_metrics(r),
            r.wall_time_ms.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Summary table with failing suites first, then failure details.
pub fn render_md(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# lpdl report\n");
    if report.results.is_empty() {
        let _ = writeln!(s, "No results.");
        return s;
    }
    let _ = writeln!(
        s,
        "{} of {} suites passed ({} ms).\n",
        report.suites - report.failed_suites,
        report.suites,
        report.wall_time_ms
    );
    let _ = writeln!(s, "| status | suite | config | p | checks | failures | metrics |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    let mut order: Vec<&SuiteResult> = report.results.iter().collect();
    order.sort_by_key(|r| r.passed);
    for r in &order {
        let _ = writeln!(
            s,
            "| {} | {} | {} n={} `{}` | {} | {} | {} | {} |",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.group,
            r.n,
            r.action,
            fmt_p(&r.p),
            r.checks,
            r.failures.len(),
            fmt_metrics(r).replace(';', ", ")
        );
    }
    for r in order.iter().filter(|r| !r.passed) {
        let _ = writeln!(s, "\n## {} failures\n", r.suite);
        for f in &r.failures {
            let _ = writeln!(s, "- p={}: {}", fmt_p(&f.config.p), f.reasons.join("; "));
        }
    }
    s
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => render_json(report),
        Format::Csv => render_csv(report),
        Format::Md => Ok(render_md(report)),
    }
}

pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<()> {
    let text = render(report, format)?;
    std::fs::write(path, text).with_context(|| format!("cannot write report to {}", path.display()))
}

/// Write each failure as its own replay case; returns the written paths.
pub fn write_cases(report: &Report, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut paths = Vec::new();
    for r in &report.results {
        for (k, case) in r.failures.iter().enumerate() {
            let path = dir.join(format!("{}-p{}-{k}.json", r.suite, fmt_p(&case.config.p)));
            std::fs::write(&path, serde_json::to_string_pretty(case)?)
                .with_context(|| format!("cannot write {}", path.display()))?;
            paths.push(path);
        }
    }
    Ok(paths)
}
