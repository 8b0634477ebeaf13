//! JSON exchange formats for labeled matrices and coefficient functions.
//!
//! Matrix: `{"rows", "cols", "entries": [[re, im], ...] (row-major),
//! "row_space": ["G:Z4", "n:2"], "col_space": [...], "p": 1.5}`.
//!
//! Coefficient function: `{"group": "Z4", "action": "perm:(0 1)", "n": 2,
//! "coeffs": {"(1)": {"rows", "cols", "entries"}, ...}}`; absent keys are zero.
//!
//! Double coefficient function: `{"group", "n", "coeffs": [...]}` with the
//! `|G|^2` matrices listed character-major, `F(gamma, s)` at `gamma * |G| + s`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::GroupAction;
use crate::crossed::CcElement;
use crate::duality::DoubleCcElement;
use crate::error::{invalid, Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::pnorm::{CMatrix, IndexFactor, LabeledOperator, PExponent};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlainMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for PlainMatrix {
    fn from(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }
}

impl TryFrom<&PlainMatrix> for CMatrix {
    type Error = Error;

    fn try_from(m: &PlainMatrix) -> Result<CMatrix> {
        if m.entries.len() != m.rows * m.cols {
            return invalid(format!(
                "{} entries for a {}x{} matrix",
                m.entries.len(),
                m.rows,
                m.cols
            ));
        }
        if m.entries.iter().flatten().any(|x| !x.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(CMatrix::from_row_iterator(
            m.rows,
            m.cols,
            m.entries.iter().map(|[re, im]| C64::new(*re, *im)),
        ))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub row_space: Vec<IndexFactor>,
    #[serde(default)]
    pub col_space: Vec<IndexFactor>,
    pub p: f64,
}

impl From<&LabeledOperator> for MatrixFile {
    fn from(op: &LabeledOperator) -> Self {
        let plain = PlainMatrix::from(&op.matrix);
        Self {
            rows: plain.rows,
            cols: plain.cols,
            entries: plain.entries,
            row_space: op.row_space.clone(),
            col_space: op.col_space.clone(),
            p: op.p.p(),
        }
    }
}

impl TryFrom<&MatrixFile> for LabeledOperator {
    type Error = Error;

    /// Missing label lists default to a single plain leg.
    fn try_from(f: &MatrixFile) -> Result<LabeledOperator> {
        let m = CMatrix::try_from(&PlainMatrix {
            rows: f.rows,
            cols: f.cols,
            entries: f.entries.clone(),
        })?;
        let rs = if f.row_space.is_empty() {
            vec![IndexFactor::Plain(f.rows)]
        } else {
            f.row_space.clone()
        };
        let cs = if f.col_space.is_empty() {
            vec![IndexFactor::Plain(f.cols)]
        } else {
            f.col_space.clone()
        };
        LabeledOperator::new(m, rs, cs, PExponent::new(f.p)?)
    }
}

pub fn operator_to_json(op: &LabeledOperator) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixFile::from(op))?)
}

pub fn operator_from_json(s: &str) -> Result<LabeledOperator> {
    let f: MatrixFile = serde_json::from_str(s)?;
    LabeledOperator::try_from(&f)
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<LabeledOperator> {
    operator_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_operator(path: impl AsRef<Path>, op: &LabeledOperator) -> Result<()> {
    std::fs::write(path, operator_to_json(op)?)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CcElementFile {
    pub group: FiniteAbelianGroup,
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub coeffs: BTreeMap<String, PlainMatrix>,
}

fn coord_key(t: &GroupElement) -> String {
    let parts: Vec<String> = t.coords.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn parse_key(key: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse {
        what: "coefficient key",
        input: key.to_string(),
        hint: "keys are group coordinates such as (1) or (1,0)".into(),
    };
    let body = key
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(bad)?;
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

impl CcElementFile {
    pub fn from_element(f: &CcElement) -> Result<Self> {
        let action = f
            .action()
            .literal()
            .ok_or_else(|| Error::InvalidArgument("only actions given by a literal can be written".into()))?
            .to_string();
        let g = f.group();
        let mut coeffs = BTreeMap::new();
        for (t, a) in f.coeffs().iter().enumerate() {
            if a.iter().any(|z| z.norm() != 0.0) {
                coeffs.insert(coord_key(&g.element(t)), PlainMatrix::from(a));
            }
        }
        Ok(Self {
            group: g.clone(),
            action,
            n: Some(f.degree()),
            coeffs,
        })
    }

    pub fn to_element(&self) -> Result<CcElement> {
        let n = match (self.n, self.coeffs.values().next()) {
            (Some(n), _) => n,
            (None, Some(m)) => m.rows,
            (None, None) => return invalid("cannot infer the matrix size of an empty coefficient list"),
        };
        let action = Arc::new(GroupAction::parse(&self.action, &self.group, n)?);
        let mut f = CcElement::zero(action.clone());
        let mut coeffs: Vec<CMatrix> = f.coeffs().to_vec();
        for (key, m) in &self.coeffs {
            let t = self.group.index_of(&GroupElement { coords: parse_key(key)? })?;
            let a = CMatrix::try_from(m)?;
            if a.shape() != (n, n) {
                return invalid(format!("coefficient {key} is not {n}x{n}"));
            }
            coeffs[t] = a;
        }
        f = CcElement::new(action, coeffs)?;
        Ok(f)
    }
}

pub fn element_to_json(f: &CcElement) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CcElementFile::from_element(f)?)?)
}

pub fn element_from_json(s: &str) -> Result<CcElement> {
    let f: CcElementFile = serde_json::from_str(s)?;
    f.to_element()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DoubleElementFile {
    pub group: FiniteAbelianGroup,
    pub n: usize,
    pub coeffs: Vec<PlainMatrix>,
}

impl From<&DoubleCcElement> for DoubleElementFile {
    fn from(f: &DoubleCcElement) -> Self {
        Self {
            group: f.group().clone(),
            n: f.degree(),
            coeffs: f.coeffs().iter().map(PlainMatrix::from).collect(),
        }
    }
}

impl TryFrom<&DoubleElementFile> for DoubleCcElement {
    type Error = Error;

    fn try_from(f: &DoubleElementFile) -> Result<DoubleCcElement> {
        let coeffs = f.coeffs.iter().map(CMatrix::try_from).collect::<Result<Vec<_>>>()?;
        DoubleCcElement::new(f.group.clone(), f.n, coeffs)
    }
}
