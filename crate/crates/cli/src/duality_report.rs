//! `duality-report`: chain reports over a list of exponents and the per-element
//! norm table.

use anyhow::Result;
use lpdl_core::duality::{chain_report, ChainOptions, ChainReport, DualityChain, ElementRecord, MAP_NAMES};
use lpdl_core::pnorm::PExponent;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityReport {
    pub generated_at: String,
    pub config: ExperimentConfig,
    pub wall_time_ms: u64,
    pub reports: Vec<ChainReport>,
}

pub fn duality_report(cfg: &ExperimentConfig, with_core: bool) -> Result<DualityReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let action = cfg.action()?;
    let mut reports = Vec::with_capacity(cfg.p.len());
    for &p in &cfg.p {
        let chain = DualityChain::new(action.clone(), PExponent::new(p)?)?;
        let opts = ChainOptions {
            margin: cfg.tolerances.margin,
            tests: cfg.tests,
            seed: cfg.seed,
            with_core,
            ..ChainOptions::default()
        };
        reports.push(chain_report(&chain, &opts)?);
    }
    Ok(DualityReport {
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: cfg.clone(),
        wall_time_ms: start.elapsed().as_millis() as u64,
        reports,
    })
}

/// One row per (element, p): source and image brackets, the verdict of each
/// map on that element, and the per-map homomorphism residuals.
pub fn norm_table_csv(report: &DualityReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["element", "label", "p", "src_lower", "src_upper", "img_lower", "img_upper"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(MAP_NAMES.iter().map(|m| format!("verdict_{m}")));
    header.extend(MAP_NAMES.iter().map(|m| format!("residual_{m}")));
    header.push("equivariance_residual".into());
    w.write_record(&header)?;
    for rep in &report.reports {
        let eq = rep.equivariance.composite.max(rep.equivariance.claim1).max(rep.equivariance.claim2);
        let rows: Vec<&ElementRecord> = rep.elements.iter().chain(rep.gap_witness.iter()).collect();
        for r in rows {
            let mut rec = vec![
                r.id.to_string(),
                r.label.clone(),
                r.p.to_string(),
                format!("{:.12e}", r.source().lower),
                format!("{:.12e}", r.source().upper),
                format!("{:.12e}", r.image().lower),
                format!("{:.12e}", r.image().upper),
            ];
            rec.extend(r.verdicts.iter().map(|v| v.label().to_string()));
            rec.extend(rep.maps.iter().map(|m| format!("{:.3e}", m.hom_residual)));
            rec.push(format!("{eq:.3e}"));
            w.write_record(&rec)?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
