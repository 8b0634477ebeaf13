use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::FiniteAbelianGroup;

pub type CMatrix = DMatrix<C64>;

/// Exponent `p` in `(1, inf)`. The conjugate exponent is derived on demand.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return invalid(format!("p must lie in (1, inf), got {p}"));
        }
        Ok(Self(p))
    }

    pub fn two() -> Self {
        Self(2.0)
    }

    pub fn p(self) -> f64 {
        self.0
    }

    pub fn q(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }

    pub fn conjugate(self) -> Self {
        Self(self.q())
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }
}

impl TryFrom<f64> for PExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<PExponent> for f64 {
    fn from(p: PExponent) -> f64 {
        p.0
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One tensor leg of an index space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum IndexFactor {
    /// `l^p(G)` with the counting basis of `G`.
    Group(FiniteAbelianGroup),
    /// `l^p` of the dual group.
    Dual(FiniteAbelianGroup),
    /// `l^p_n`.
    Plain(usize),
}

impl IndexFactor {
    pub fn size(&self) -> usize {
        match self {
            IndexFactor::Group(g) | IndexFactor::Dual(g) => g.order(),
            IndexFactor::Plain(n) => *n,
        }
    }
}

pub fn space_size(space: &[IndexFactor]) -> usize {
    space.iter().map(IndexFactor::size).product()
}

impl fmt::Display for IndexFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexFactor::Group(g) => write!(f, "G:{g}"),
            IndexFactor::Dual(g) => write!(f, "Ghat:{g}"),
            IndexFactor::Plain(n) => write!(f, "n:{n}"),
        }
    }
}

impl FromStr for IndexFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "index label",
            input: s.to_string(),
            hint: "use G:<group>, Ghat:<group> or n:<size>, e.g. G:Z4".into(),
        };
        let (kind, rest) = s.split_once(':').ok_or_else(err)?;
        match kind.trim() {
            "G" => Ok(IndexFactor::Group(rest.parse()?)),
            "Ghat" => Ok(IndexFactor::Dual(rest.parse()?)),
            "n" => rest.trim().parse().map(IndexFactor::Plain).map_err(|_| err()),
            _ => Err(err()),
        }
    }
}

impl TryFrom<String> for IndexFactor {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<IndexFactor> for String {
    fn from(f: IndexFactor) -> String {
        f.to_string()
    }
}

/// A dense complex matrix together with the tensor structure of its row and
/// column spaces and the exponent it is normed against.
///
/// Multi-leg spaces are ordered with the first leg slowest (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledOperator {
    pub matrix: CMatrix,
    pub row_space: Vec<IndexFactor>,
    pub col_space: Vec<IndexFactor>,
    pub p: PExponent,
}

impl LabeledOperator {
    pub fn new(
        matrix: CMatrix,
        row_space: Vec<IndexFactor>,
        col_space: Vec<IndexFactor>,
        p: PExponent,
    ) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != space_size(&row_space) || c != space_size(&col_space) {
            return invalid(format!(
                "matrix is {r}x{c} but labels describe {}x{}",
                space_size(&row_space),
                space_size(&col_space)
            ));
        }
        Ok(Self {
            matrix,
            row_space,
            col_space,
            p,
        })
    }

    pub fn square(matrix: CMatrix, space: Vec<IndexFactor>, p: PExponent) -> Result<Self> {
        Self::new(matrix, space.clone(), space, p)
    }

    /// Unlabeled square matrix: a single `n:dim` leg.
    pub fn plain(matrix: CMatrix, p: PExponent) -> Result<Self> {
        let (r, c) = matrix.shape();
        Self::new(matrix, vec![IndexFactor::Plain(r)], vec![IndexFactor::Plain(c)], p)
    }

    pub fn identity(space: Vec<IndexFactor>, p: PExponent) -> Self {
        let d = space_size(&space);
        Self {
            matrix: CMatrix::identity(d, d),
            row_space: space.clone(),
            col_space: space,
            p,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.matrix.is_square()
    }

    /// `self * rhs`; the column legs of `self` must equal the row legs of `rhs`.
    pub fn compose(&self, rhs: &LabeledOperator) -> Result<LabeledOperator> {
        if self.col_space != rhs.row_space {
            return invalid(format!(
                "cannot compose: column space {} vs row space {}",
                fmt_space(&self.col_space),
                fmt_space(&rhs.row_space)
            ));
        }
        if self.p != rhs.p {
            return invalid(format!("cannot compose operators normed at p={} and p={}", self.p, rhs.p));
        }
        Ok(LabeledOperator {
            matrix: &self.matrix * &rhs.matrix,
            row_space: self.row_space.clone(),
            col_space: rhs.col_space.clone(),
            p: self.p,
        })
    }

    pub fn with_matrix(&self, matrix: CMatrix) -> LabeledOperator {
        LabeledOperator {
            matrix,
            row_space: self.row_space.clone(),
            col_space: self.col_space.clone(),
            p: self.p,
        }
    }

    pub fn with_p(&self, p: PExponent) -> LabeledOperator {
        LabeledOperator { p, ..self.clone() }
    }

    pub fn transpose(&self) -> LabeledOperator {
        LabeledOperator {
            matrix: self.matrix.transpose(),
            row_space: self.col_space.clone(),
            col_space: self.row_space.clone(),
            p: self.p.conjugate(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &LabeledOperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn fmt_space(space: &[IndexFactor]) -> String {
    let parts: Vec<String> = space.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_bounds() {
        assert!(PExponent::new(1.0).is_err());
        assert!(PExponent::new(f64::INFINITY).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
        let p = PExponent::new(3.0).unwrap();
        assert!((1.0 / p.p() + 1.0 / p.q() - 1.0).abs() < 1e-15);
        assert_eq!(PExponent::new(1.5).unwrap().q(), 3.0);
    }

    #[test]
    fn labels_parse() {
        let f: IndexFactor = "G:Z4".parse().unwrap();
        assert_eq!(f.size(), 4);
        let f: IndexFactor = "Ghat:Z2xZ2".parse().unwrap();
        assert_eq!(f.to_string(), "Ghat:Z2xZ2");
        assert_eq!("n:3".parse::<IndexFactor>().unwrap(), IndexFactor::Plain(3));
        assert!("m:3".parse::<IndexFactor>().is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = PExponent::two();
        let m = CMatrix::zeros(3, 3);
        assert!(LabeledOperator::square(m, vec![IndexFactor::Plain(2)], p).is_err());
    }

    #[test]
    fn composition_checks_labels() {
        let p = PExponent::two();
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        let a = LabeledOperator::identity(vec![IndexFactor::Group(g.clone())], p);
        let b = LabeledOperator::identity(vec![IndexFactor::Dual(g)], p);
        assert!(a.compose(&a).is_ok());
        assert!(a.compose(&b).is_err());
    }
}
