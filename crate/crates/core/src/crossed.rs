//! Crossed products of `M_d` by a finite abelian group acting through phased
//! permutations, realized on `l^p(H) (x) l^p_d` in the regular covariant
//! representation.
//!
//! With Haar weight `w` on `H` (1 for counting measure, `1/|H|` for the
//! normalized one), the element `f = sum_t a_t delta_t` is represented by
//! `sum_t w pi(a_t) lambda(t)`, where `pi(a) = sum_t e_tt (x) alpha_{-t}(a)`
//! and `lambda(s) delta_t = delta_{s+t}`. Block `(r, c)` of the result is
//! `w alpha_{-r}(a_{r-c})`; the coefficient `a_t` sits in block `(e, -t)`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::algebra::GroupAction;
use crate::error::{invalid, Result};
use crate::group::FiniteAbelianGroup;
use crate::pnorm::{fmt_space, space_size, CMatrix, IndexFactor, LabeledOperator, PExponent};

/// Haar measure convention on the acting group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HaarMeasure {
    Counting,
    Normalized,
}

impl HaarMeasure {
    pub fn weight(self, group: &FiniteAbelianGroup) -> f64 {
        match self {
            HaarMeasure::Counting => 1.0,
            HaarMeasure::Normalized => 1.0 / group.order() as f64,
        }
    }
}

/// A function `H -> M_d`, stored in element enumeration order, together with
/// the action it is twisted by.
#[derive(Clone, Debug)]
pub struct CcElement {
    action: Arc<GroupAction>,
    coeffs: Vec<CMatrix>,
}

impl PartialEq for CcElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && (Arc::ptr_eq(&self.action, &other.action) || self.action == other.action)
    }
}

impl CcElement {
    pub fn new(action: Arc<GroupAction>, coeffs: Vec<CMatrix>) -> Result<Self> {
        let n = action.group().order();
        let d = action.degree();
        if coeffs.len() != n {
            return invalid(format!("{} coefficients for a group of order {n}", coeffs.len()));
        }
        if coeffs.iter().any(|a| a.shape() != (d, d)) {
            return invalid(format!("coefficients must be {d}x{d}"));
        }
        Ok(Self { action, coeffs })
    }

    pub fn zero(action: Arc<GroupAction>) -> Self {
        let d = action.degree();
        let coeffs = vec![CMatrix::zeros(d, d); action.group().order()];
        Self { action, coeffs }
    }

    /// `a delta_t`.
    pub fn point(action: Arc<GroupAction>, t: usize, a: CMatrix) -> Result<Self> {
        let mut f = Self::zero(action);
        if t >= f.coeffs.len() || a.shape() != f.coeffs[0].shape() {
            return invalid("point mass outside the group or of the wrong size");
        }
        f.coeffs[t] = a;
        Ok(f)
    }

    pub fn random(action: Arc<GroupAction>, rng: &mut impl Rng) -> Self {
        let d = action.degree();
        let coeffs = (0..action.group().order())
            .map(|_| CMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        Self { action, coeffs }
    }

    pub fn action(&self) -> &Arc<GroupAction> {
        &self.action
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.action.group()
    }

    pub fn degree(&self) -> usize {
        self.action.degree()
    }

    pub fn coeff(&self, t: usize) -> &CMatrix {
        &self.coeffs[t]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<CMatrix> {
        self.coeffs
    }

    pub fn map(&self, f: impl Fn(usize, &CMatrix) -> CMatrix) -> Self {
        Self {
            action: self.action.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(t, a)| f(t, a)).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !(Arc::ptr_eq(&self.action, &other.action) || *self.action == *other.action) {
            return invalid("elements are twisted by different actions");
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.map(|t, a| a + &other.coeffs[t]))
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map(|_, a| a * z)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| crate::pnorm::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }
}

/// `(f * g)(t) = w sum_s f(s) alpha_s(g(t - s))`.
pub fn twisted_convolve_weighted(f: &CcElement, g: &CcElement, w: f64) -> Result<CcElement> {
    f.check_compatible(g)?;
    let group = f.group();
    let n = group.order();
    let d = f.degree();
    let mut out = vec![CMatrix::zeros(d, d); n];
    for s in 0..n {
        if f.coeffs[s].iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        for u in 0..n {
            // t = s + u
            let t = group.add_idx(s, u);
            out[t] += &f.coeffs[s] * f.action.apply(s, &g.coeffs[u]) * C64::new(w, 0.0);
        }
    }
    Ok(CcElement {
        action: f.action.clone(),
        coeffs: out,
    })
}

/// Twisted convolution for counting measure.
pub fn twisted_convolve(f: &CcElement, g: &CcElement) -> Result<CcElement> {
    twisted_convolve_weighted(f, g, 1.0)
}

/// An integrated-form matrix, with the coefficient function it came from
/// when known.
#[derive(Clone, Debug)]
pub struct CrossedProductRep {
    pub ambient: LabeledOperator,
    pub source: Option<CcElement>,
}

/// The regular representation of a crossed product over one group.
#[derive(Clone, Debug)]
pub struct CrossedProduct {
    outer: IndexFactor,
    inner: Vec<IndexFactor>,
    action: Arc<GroupAction>,
    haar: HaarMeasure,
    p: PExponent,
}

impl CrossedProduct {
    /// `outer` must be the `G` or `Ghat` leg of the acting group; `inner`
    /// describes the space the action's implementers act on.
    pub fn new(
        outer: IndexFactor,
        inner: Vec<IndexFactor>,
        action: Arc<GroupAction>,
        haar: HaarMeasure,
        p: PExponent,
    ) -> Result<Self> {
        match &outer {
            IndexFactor::Group(g) | IndexFactor::Dual(g) if g == action.group() => {}
            _ => return invalid(format!("outer leg {outer} does not match the acting group {}", action.group())),
        }
        if space_size(&inner) != action.degree() {
            return invalid(format!(
                "inner space {} has dimension {}, action has degree {}",
                fmt_space(&inner),
                space_size(&inner),
                action.degree()
            ));
        }
        Ok(Self {
            outer,
            inner,
            action,
            haar,
            p,
        })
    }

    /// `W*_p(G, M_n, alpha)` with counting measure on labels `[G, n]`.
    pub fn standard(action: Arc<GroupAction>, p: PExponent) -> Self {
        let outer = IndexFactor::Group(action.group().clone());
        let inner = vec![IndexFactor::Plain(action.degree())];
        Self {
            outer,
            inner,
            action,
            haar: HaarMeasure::Counting,
            p,
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.action.group()
    }

    pub fn action(&self) -> &Arc<GroupAction> {
        &self.action
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn weight(&self) -> f64 {
        self.haar.weight(self.group())
    }

    pub fn inner_space(&self) -> &[IndexFactor] {
        &self.inner
    }

    pub fn space(&self) -> Vec<IndexFactor> {
        let mut s = vec![self.outer.clone()];
        s.extend(self.inner.iter().cloned());
        s
    }

    pub fn dim(&self) -> usize {
        self.group().order() * self.action.degree()
    }

    fn labeled(&self, m: CMatrix) -> LabeledOperator {
        let space = self.space();
        LabeledOperator {
            matrix: m,
            row_space: space.clone(),
            col_space: space,
            p: self.p,
        }
    }

    /// `pi(a) = sum_t e_tt (x) alpha_{-t}(a)`.
    pub fn pi(&self, a: &CMatrix) -> Result<LabeledOperator> {
        let d = self.action.degree();
        if a.shape() != (d, d) {
            return invalid(format!("expected a {d}x{d} matrix"));
        }
        let g = self.group();
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for t in 0..g.order() {
            m.view_mut((t * d, t * d), (d, d))
                .copy_from(&self.action.apply(g.neg_idx(t), a));
        }
        Ok(self.labeled(m))
    }

    /// `lambda(s) (x) I`.
    pub fn lambda(&self, s: usize) -> LabeledOperator {
        let d = self.action.degree();
        let g = self.group();
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for t in 0..g.order() {
            let r = g.add_idx(s, t);
            for i in 0..d {
                m[(r * d + i, t * d + i)] = C64::new(1.0, 0.0);
            }
        }
        self.labeled(m)
    }

    fn check_element(&self, f: &CcElement) -> Result<()> {
        if !(Arc::ptr_eq(&self.action, &f.action) || *self.action == *f.action) {
            return invalid("element is twisted by a different action than the crossed product");
        }
        Ok(())
    }

    pub fn integrated_matrix(&self, f: &CcElement) -> Result<CMatrix> {
        self.check_element(f)?;
        let g = self.group();
        let n = g.order();
        let d = self.action.degree();
        let w = C64::new(self.weight(), 0.0);
        let mut m = CMatrix::zeros(n * d, n * d);
        for r in 0..n {
            let nr = g.neg_idx(r);
            for c in 0..n {
                let a = &f.coeffs[g.sub_idx(r, c)];
                m.view_mut((r * d, c * d), (d, d)).copy_from(&(self.action.apply(nr, a) * w));
            }
        }
        Ok(m)
    }

    /// `sum_t w pi(f(t)) lambda(t)`.
    pub fn integrated_form(&self, f: &CcElement) -> Result<CrossedProductRep> {
        Ok(CrossedProductRep {
            ambient: self.labeled(self.integrated_matrix(f)?),
            source: Some(f.clone()),
        })
    }

    pub fn convolve(&self, f: &CcElement, g: &CcElement) -> Result<CcElement> {
        self.check_element(f)?;
        twisted_convolve_weighted(f, g, self.weight())
    }

    fn check_labels(&self, t: &LabeledOperator) -> Result<()> {
        let space = self.space();
        if t.row_space != space || t.col_space != space {
            return invalid(format!(
                "expected an operator on {}, got {} -> {}",
                fmt_space(&space),
                fmt_space(&t.col_space),
                fmt_space(&t.row_space)
            ));
        }
        Ok(())
    }

    /// `E_t`, read off from the block `(e, -t)` and divided by the Haar weight.
    pub fn expectation_matrix(&self, m: &CMatrix, t: usize) -> Result<CMatrix> {
        let d = self.action.degree();
        if m.shape() != (self.dim(), self.dim()) {
            return invalid("operator has the wrong dimension for this crossed product");
        }
        let g = self.group();
        if t >= g.order() {
            return invalid("group element index out of range");
        }
        let c = g.neg_idx(t);
        Ok(m.view((0, c * d), (d, d)).into_owned() / C64::new(self.weight(), 0.0))
    }

    pub fn expectation(&self, op: &LabeledOperator, t: usize) -> Result<CMatrix> {
        self.check_labels(op)?;
        self.expectation_matrix(&op.matrix, t)
    }

    pub fn reconstruct_matrix(&self, m: &CMatrix) -> Result<CcElement> {
        let coeffs = (0..self.group().order())
            .map(|t| self.expectation_matrix(m, t))
            .collect::<Result<Vec<_>>>()?;
        CcElement::new(self.action.clone(), coeffs)
    }

    /// The coefficient function `t -> E_t(op)`.
    pub fn reconstruct(&self, op: &LabeledOperator) -> Result<CcElement> {
        self.check_labels(op)?;
        self.reconstruct_matrix(&op.matrix)
    }

    /// Largest entry of `m - integrated_form(reconstruct(m))`; zero exactly
    /// when `m` lies in the crossed product.
    pub fn span_residual(&self, m: &CMatrix) -> Result<f64> {
        let f = self.reconstruct_matrix(m)?;
        Ok(crate::pnorm::max_abs_diff(m, &self.integrated_matrix(&f)?))
    }

    /// `pi(e_ij) lambda(t)` over all `t` (slowest) and matrix units.
    pub fn basis(&self) -> Vec<LabeledOperator> {
        let d = self.action.degree();
        let mut out = Vec::with_capacity(self.group().order() * d * d);
        for t in 0..self.group().order() {
            let lt = self.lambda(t);
            for i in 0..d {
                for j in 0..d {
                    let mut e = CMatrix::zeros(d, d);
                    e[(i, j)] = C64::new(1.0, 0.0);
                    let pe = self.pi(&e).expect("matrix unit has the right size");
                    out.push(self.labeled(&pe.matrix * &lt.matrix));
                }
            }
        }
        out
    }
}

/// Basis of `W*_p(G, M_n, alpha)` in its regular representation.
pub fn crossed_product_basis(action: Arc<GroupAction>, p: PExponent) -> Vec<LabeledOperator> {
    CrossedProduct::standard(action, p).basis()
}
