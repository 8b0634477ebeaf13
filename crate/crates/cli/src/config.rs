//! Experiment configuration, read from JSON or assembled from flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use lpdl_core::algebra::GroupAction;
use lpdl_core::group::FiniteAbelianGroup;
use lpdl_core::pnorm::PExponent;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Entrywise relative tolerance for exact identities.
    pub identity: f64,
    /// Relative margin for norm-based verdicts.
    pub margin: f64,
    /// Depth of the grid bound for matrices of dimension at most 4.
    pub grid_depth: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            margin: 1e-3,
            grid_depth: 16,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub md: Option<PathBuf>,
    /// Directory receiving one replayable case file per failure.
    pub cases: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: String,
    pub n: usize,
    #[serde(default = "default_action")]
    pub action: String,
    pub p: Vec<f64>,
    #[serde(default = "default_tests")]
    pub tests: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "is_default_outputs")]
    pub outputs: Outputs,
}

fn default_action() -> String {
    "trivial".into()
}

fn default_tests() -> usize {
    8
}

fn is_default_outputs(o: &Outputs) -> bool {
    *o == Outputs::default()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            bail!("no p values given; pass at least one exponent in (1, inf), e.g. --p 1.5,2,3");
        }
        for &p in &self.p {
            PExponent::new(p).with_context(|| format!("p = {p}: exponents must lie in (1, inf)"))?;
        }
        if self.tests == 0 {
            bail!("test-set size must be at least 1");
        }
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        if !(self.tolerances.identity > 0.0 && self.tolerances.margin > 0.0) {
            bail!("tolerances must be positive");
        }
        self.action()?;
        Ok(())
    }

    pub fn group(&self) -> Result<FiniteAbelianGroup> {
        self.group
            .parse()
            .with_context(|| format!("invalid group literal `{}` (try Z4, Z2xZ2 or Z1)", self.group))
    }

    pub fn action(&self) -> Result<Arc<GroupAction>> {
        let g = self.group()?;
        let a = GroupAction::parse(&self.action, &g, self.n).with_context(|| {
            format!(
                "invalid action literal `{}` for {g} on M_{}; use `trivial` or one generator per factor, \
                 e.g. `perm:(0 1)` or `phased:(0 1)[0,1/4]`, separated by `;`",
                self.action, self.n
            )
        })?;
        Ok(Arc::new(a))
    }

    /// Copy restricted to a single exponent.
    pub fn at_p(&self, p: f64) -> Self {
        Self {
            p: vec![p],
            outputs: Outputs::default(),
            ..self.clone()
        }
    }
}

/// Parse a comma-separated list of exponents.
pub fn parse_p_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("`{t}` is not a number; write exponents like 1.5,2,3"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            group: "Z4".into(),
            n: 2,
            action: "phased:(0 1)[1/8,0]".into(),
            p: vec![1.5, 2.0, 3.0],
            tests: 4,
            seed: 7,
            tolerances: Tolerances::default(),
            outputs: Outputs::default(),
        }
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.p = vec![1.0];
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.tests = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.group = "Q8".into();
        let err = format!("{:#}", c.validate().unwrap_err());
        assert!(err.contains("Z2xZ2"), "{err}");
        let mut c = cfg();
        c.action = "perm:(0 1 2)".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"group":"Z2","n":1,"p":[3]}"#).unwrap();
        assert_eq!(c.action, "trivial");
        assert_eq!(c.tests, 8);
        assert_eq!(c.tolerances, Tolerances::default());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"group":"Z2","n":1,"p":[3],"bogus":1}"#).is_err());
    }

    #[test]
    fn p_list() {
        assert_eq!(parse_p_list("1.5, 2,3").unwrap(), vec![1.5, 2.0, 3.0]);
        assert!(parse_p_list("1.5,x").is_err());
    }
}
