use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::group::FiniteAbelianGroup;
use crate::pnorm::{max_abs_diff, CMatrix};

/// An `M_n`-valued function of two variables ranging over groups of the same
/// order `N`, stored with the first variable slowest.
///
/// As an element of the double crossed product the variables are `(gamma, s)`
/// with `gamma` in the dual group. The same layout carries the intermediate
/// coefficient forms of the chain, e.g. `(s, gamma)` after the first map and
/// `(s, t)` after the second.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleCcElement {
    group: FiniteAbelianGroup,
    degree: usize,
    coeffs: Vec<CMatrix>,
}

impl DoubleCcElement {
    pub fn new(group: FiniteAbelianGroup, degree: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        let n = group.order();
        if coeffs.len() != n * n {
            return invalid(format!("{} coefficients, expected {}", coeffs.len(), n * n));
        }
        if coeffs.iter().any(|a| a.shape() != (degree, degree)) {
            return invalid(format!("coefficients must be {degree}x{degree}"));
        }
        Ok(Self { group, degree, coeffs })
    }

    pub fn zero(group: FiniteAbelianGroup, degree: usize) -> Self {
        let n = group.order();
        Self {
            group,
            degree,
            coeffs: vec![CMatrix::zeros(degree, degree); n * n],
        }
    }

    pub fn point(group: FiniteAbelianGroup, degree: usize, a: usize, b: usize, m: CMatrix) -> Result<Self> {
        let mut f = Self::zero(group, degree);
        let n = f.group.order();
        if a >= n || b >= n || m.shape() != (degree, degree) {
            return invalid("point mass outside the index range or of the wrong size");
        }
        f.coeffs[a * n + b] = m;
        Ok(f)
    }

    /// The unit of the double crossed product: `N I` at (trivial character, e).
    /// The factor `N` compensates the normalized measure on the dual group.
    pub fn unit(group: FiniteAbelianGroup, degree: usize) -> Self {
        let n = group.order() as f64;
        Self::point(group, degree, 0, 0, CMatrix::identity(degree, degree) * C64::new(n, 0.0))
            .expect("identity indices are in range")
    }

    pub fn random(group: FiniteAbelianGroup, degree: usize, rng: &mut impl Rng) -> Self {
        let n = group.order();
        let coeffs = (0..n * n)
            .map(|_| CMatrix::from_fn(degree, degree, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        Self { group, degree, coeffs }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, a: usize, b: usize) -> &CMatrix {
        &self.coeffs[a * self.group.order() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, m: CMatrix) {
        let n = self.group.order();
        self.coeffs[a * n + b] = m;
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Coefficients `b -> F(a, b)` for fixed `a`.
    pub fn row(&self, a: usize) -> Vec<CMatrix> {
        let n = self.group.order();
        self.coeffs[a * n..(a + 1) * n].to_vec()
    }

    pub fn map(&self, f: impl Fn(usize, usize, &CMatrix) -> CMatrix) -> Self {
        let n = self.group.order();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, m)| f(k / n, k % n, m))
            .collect();
        Self {
            group: self.group.clone(),
            degree: self.degree,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.group != other.group || self.degree != other.degree {
            return invalid("adding coefficient functions of different shapes");
        }
        Ok(self.map(|a, b, m| m + other.get(a, b)))
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map(|_, _, m| m * z)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }
}
