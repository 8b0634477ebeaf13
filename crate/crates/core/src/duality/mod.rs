//! The duality chain `Phi = Phi4 o Phi3 o Phi2 o Phi1` from the double
//! crossed product `(M_n x|_alpha G) x|_{dual} Ghat` onto `B(l^p(G)) (x) M_n`.
//!
//! All algebras are realized in regular representations:
//!
//! | stage                          | labels              | acting group, action, measure     |
//! |--------------------------------|---------------------|-----------------------------------|
//! | source (double crossed product)| `[Ghat, G, n]`      | `Ghat`, dual action, normalized   |
//! | after `Phi1`                   | `[G, Ghat, n]`      | `G`, `beta`, counting             |
//! | after `Phi2`                   | `[G, G, n]`         | `G`, `lt (x) alpha`, counting     |
//! | after `Phi3`                   | `[G, G, n]`         | `G`, `lt (x) id`, counting        |
//! | after `Phi4`                   | `[G, n]`            | plain operators                   |
//!
//! The inner algebra of the `beta` stage is `PM_p(Ghat) (x) M_n`, the crossed
//! product of `M_n` by the trivial action of `Ghat` with normalized measure.

mod coeffs;
mod report;

pub use coeffs::DoubleCcElement;
pub use report::*;

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::algebra::{GroupAction, PhasedPermutation};
use crate::crossed::{CcElement, CrossedProduct, HaarMeasure};
use crate::error::{invalid, Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::pnorm::{max_abs, max_abs_diff, CMatrix, IndexFactor, LabeledOperator, PExponent};

/// Relative tolerance for the structural checks inside the maps.
pub const STRUCTURE_TOL: f64 = 1e-9;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Precomputed actions, crossed products and intertwiners for one
/// configuration `(G, n, alpha, p)`.
#[derive(Clone, Debug)]
pub struct DualityChain {
    group: FiniteAbelianGroup,
    n: usize,
    p: PExponent,
    alpha: Arc<GroupAction>,
    chars: CMatrix,
    /// `M_n x|_alpha G` on `[G, n]`.
    inner: CrossedProduct,
    dual_action: Arc<GroupAction>,
    double: CrossedProduct,
    trivial_hat: Arc<GroupAction>,
    pm_inner: CrossedProduct,
    beta: Arc<GroupAction>,
    outer_beta: CrossedProduct,
    lt_alpha: Arc<GroupAction>,
    outer_lt_alpha: CrossedProduct,
    lt_id: Arc<GroupAction>,
    outer_lt_id: CrossedProduct,
    w: PhasedPermutation,
    v: PhasedPermutation,
    z3: PhasedPermutation,
}

impl DualityChain {
    pub fn new(alpha: Arc<GroupAction>, p: PExponent) -> Result<Self> {
        let group = alpha.group().clone();
        let big_n = group.order();
        let n = alpha.degree();
        let chars = group.character_table();
        let g_leg = IndexFactor::Group(group.clone());
        let h_leg = IndexFactor::Dual(group.clone());
        let plain = IndexFactor::Plain(n);

        let inner = CrossedProduct::new(g_leg.clone(), vec![plain.clone()], alpha.clone(), HaarMeasure::Counting, p)?;

        // dual action: Ad(V_gamma (x) I_n), V_gamma = diag_s conj(gamma(s))
        let dual_impl = (0..big_n)
            .map(|g| {
                let v = PhasedPermutation::diagonal((0..big_n).map(|s| chars[(g, s)].conj()).collect())?;
                Ok(v.kron(&PhasedPermutation::identity(n)))
            })
            .collect::<Result<Vec<_>>>()?;
        let dual_action = Arc::new(GroupAction::from_implementers(group.clone(), dual_impl)?);
        let double = CrossedProduct::new(
            h_leg.clone(),
            vec![g_leg.clone(), plain.clone()],
            dual_action.clone(),
            HaarMeasure::Normalized,
            p,
        )?;

        let trivial_hat = Arc::new(GroupAction::trivial(group.clone(), n));
        let pm_inner = CrossedProduct::new(h_leg.clone(), vec![plain.clone()], trivial_hat.clone(), HaarMeasure::Normalized, p)?;

        // beta_t = Ad(diag_gamma gamma(t) (x) u_t)
        let beta_impl = (0..big_n)
            .map(|t| {
                let d = PhasedPermutation::diagonal((0..big_n).map(|g| chars[(g, t)]).collect())?;
                Ok(d.kron(alpha.implementer(t)))
            })
            .collect::<Result<Vec<_>>>()?;
        let beta = Arc::new(GroupAction::from_implementers(group.clone(), beta_impl)?);
        let outer_beta = CrossedProduct::new(
            g_leg.clone(),
            vec![h_leg.clone(), plain.clone()],
            beta.clone(),
            HaarMeasure::Counting,
            p,
        )?;

        let translation = |t: usize| {
            PhasedPermutation::permutation((0..big_n).map(|s| group.add_idx(t, s)).collect())
        };
        let lt_alpha_impl = (0..big_n)
            .map(|t| Ok(translation(t)?.kron(alpha.implementer(t))))
            .collect::<Result<Vec<_>>>()?;
        let lt_alpha = Arc::new(GroupAction::from_implementers(group.clone(), lt_alpha_impl)?);
        let outer_lt_alpha = CrossedProduct::new(
            g_leg.clone(),
            vec![g_leg.clone(), plain.clone()],
            lt_alpha.clone(),
            HaarMeasure::Counting,
            p,
        )?;
        let lt_id_impl = (0..big_n)
            .map(|t| Ok(translation(t)?.kron(&PhasedPermutation::identity(n))))
            .collect::<Result<Vec<_>>>()?;
        let lt_id = Arc::new(GroupAction::from_implementers(group.clone(), lt_id_impl)?);
        let outer_lt_id = CrossedProduct::new(
            g_leg.clone(),
            vec![g_leg.clone(), plain.clone()],
            lt_id.clone(),
            HaarMeasure::Counting,
            p,
        )?;

        // W: delta_sigma (x) delta_c (x) xi -> conj(sigma(c)) delta_c (x) delta_sigma (x) xi
        let dim3 = big_n * big_n * n;
        let mut perm = vec![0; dim3];
        let mut phase = vec![one(); dim3];
        for sigma in 0..big_n {
            for c in 0..big_n {
                for i in 0..n {
                    let src = (sigma * big_n + c) * n + i;
                    perm[src] = (c * big_n + sigma) * n + i;
                    phase[src] = chars[(sigma, c)].conj();
                }
            }
        }
        let w = PhasedPermutation::new(perm, phase)?;

        // V: delta_s (x) delta_t (x) xi -> delta_{s+t} (x) delta_t (x) xi
        let mut perm = vec![0; dim3];
        for s in 0..big_n {
            for t in 0..big_n {
                for i in 0..n {
                    perm[(s * big_n + t) * n + i] = (group.add_idx(s, t) * big_n + t) * n + i;
                }
            }
        }
        let v = PhasedPermutation::permutation(perm)?;

        // I_G (x) diag_t u_{-t}
        let mut zperm = Vec::with_capacity(big_n * n);
        let mut zphase = Vec::with_capacity(big_n * n);
        for t in 0..big_n {
            let u = alpha.implementer(group.neg_idx(t));
            for j in 0..n {
                zperm.push(t * n + u.perm()[j]);
                zphase.push(u.phases()[j]);
            }
        }
        let z3 = PhasedPermutation::identity(big_n).kron(&PhasedPermutation::new(zperm, zphase)?);

        Ok(Self {
            group,
            n,
            p,
            alpha,
            chars,
            inner,
            dual_action,
            double,
            trivial_hat,
            pm_inner,
            beta,
            outer_beta,
            lt_alpha,
            outer_lt_alpha,
            lt_id,
            outer_lt_id,
            w,
            v,
            z3,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn alpha(&self) -> &Arc<GroupAction> {
        &self.alpha
    }

    pub fn beta(&self) -> &Arc<GroupAction> {
        &self.beta
    }

    pub fn dual_action_group_action(&self) -> &Arc<GroupAction> {
        &self.dual_action
    }

    pub fn lt_alpha(&self) -> &Arc<GroupAction> {
        &self.lt_alpha
    }

    pub fn lt_id(&self) -> &Arc<GroupAction> {
        &self.lt_id
    }

    /// `M_n x|_alpha G` on `[G, n]`.
    pub fn inner_crossed_product(&self) -> &CrossedProduct {
        &self.inner
    }

    pub fn double_crossed_product(&self) -> &CrossedProduct {
        &self.double
    }

    /// `PM_p(Ghat) (x) M_n` on `[Ghat, n]`.
    pub fn pm_inner(&self) -> &CrossedProduct {
        &self.pm_inner
    }

    pub fn outer_beta(&self) -> &CrossedProduct {
        &self.outer_beta
    }

    pub fn outer_lt_alpha(&self) -> &CrossedProduct {
        &self.outer_lt_alpha
    }

    pub fn outer_lt_id(&self) -> &CrossedProduct {
        &self.outer_lt_id
    }

    /// The isometry `W : [Ghat, G, n] -> [G, Ghat, n]` implementing `Phi1`.
    pub fn w(&self) -> &PhasedPermutation {
        &self.w
    }

    /// The permutation `V` on `[G, G, n]` used by `Phi4`.
    pub fn v(&self) -> &PhasedPermutation {
        &self.v
    }

    /// `I_G (x) diag_t u_{-t}`; `Phi3` is conjugation by it.
    pub fn z3(&self) -> &PhasedPermutation {
        &self.z3
    }

    /// `gamma(s)` by indices.
    pub fn pairing(&self, gamma: usize, s: usize) -> C64 {
        self.chars[(gamma, s)]
    }

    fn order(&self) -> usize {
        self.group.order()
    }

    fn check_double(&self, f: &DoubleCcElement) -> Result<()> {
        if f.group() != &self.group || f.degree() != self.n {
            return invalid("coefficient function does not match the chain configuration");
        }
        Ok(())
    }

    fn labeled(&self, m: CMatrix, space: Vec<IndexFactor>) -> LabeledOperator {
        LabeledOperator {
            matrix: m,
            row_space: space.clone(),
            col_space: space,
            p: self.p,
        }
    }

    // ---- source ------------------------------------------------------------

    /// Coefficients `gamma -> x(gamma)` in `M_n x|_alpha G`, where `x(gamma)`
    /// integrates `s -> F(gamma, s)`.
    pub fn double_as_outer(&self, f: &DoubleCcElement) -> Result<CcElement> {
        self.check_double(f)?;
        let coeffs = (0..self.order())
            .map(|g| {
                let inner = CcElement::new(self.alpha.clone(), f.row(g))?;
                self.inner.integrated_matrix(&inner)
            })
            .collect::<Result<Vec<_>>>()?;
        CcElement::new(self.dual_action.clone(), coeffs)
    }

    /// Regular representation of the double crossed product on `[Ghat, G, n]`.
    pub fn rep_double(&self, f: &DoubleCcElement) -> Result<LabeledOperator> {
        let outer = self.double_as_outer(f)?;
        Ok(self.labeled(self.double.integrated_matrix(&outer)?, self.double.space()))
    }

    /// Recover `F` from its representation.
    pub fn unrep_double(&self, x: &CMatrix) -> Result<DoubleCcElement> {
        let outer = self.double.reconstruct_matrix(x)?;
        let mut coeffs = Vec::with_capacity(self.order() * self.order());
        for g in 0..self.order() {
            coeffs.extend(self.inner.reconstruct_matrix(outer.coeff(g))?.into_coeffs());
        }
        DoubleCcElement::new(self.group.clone(), self.n, coeffs)
    }

    /// Product in the double crossed product: twisted convolution over `Ghat`
    /// (normalized measure, dual action) of twisted convolutions over `G`.
    pub fn double_convolve(&self, f: &DoubleCcElement, h: &DoubleCcElement) -> Result<DoubleCcElement> {
        self.check_double(f)?;
        self.check_double(h)?;
        let big_n = self.order();
        let w = 1.0 / big_n as f64;
        let mut out = DoubleCcElement::zero(self.group.clone(), self.n);
        let rows_h: Vec<CcElement> = (0..big_n)
            .map(|g| CcElement::new(self.alpha.clone(), h.row(g)))
            .collect::<Result<_>>()?;
        for sigma in 0..big_n {
            let fs = CcElement::new(self.alpha.clone(), f.row(sigma))?;
            for (tau, row) in rows_h.iter().enumerate() {
                let gamma = self.group.add_idx(sigma, tau);
                let twisted = self.dual_action_coeffs(sigma, row);
                let prod = self.inner.convolve(&fs, &twisted)?;
                for s in 0..big_n {
                    let acc = out.get(gamma, s) + prod.coeff(s) * C64::new(w, 0.0);
                    out.set(gamma, s, acc);
                }
            }
        }
        Ok(out)
    }

    /// Dual action on coefficients: `sum a_s delta_s -> sum conj(gamma(s)) a_s delta_s`.
    pub fn dual_action_coeffs(&self, gamma: usize, f: &CcElement) -> CcElement {
        f.map(|s, a| a * self.chars[(gamma, s)].conj())
    }

    /// `alpha_hat_gamma(x) = (V_gamma (x) I) x (V_gamma^{-1} (x) I)` on `[G, n]`.
    pub fn dual_action(&self, gamma: usize, x: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.inner.space();
        if x.row_space != space || x.col_space != space {
            return invalid("dual action expects an operator on [G, n]");
        }
        if gamma >= self.order() {
            return invalid("character index out of range");
        }
        Ok(x.with_matrix(self.dual_action.apply(gamma, &x.matrix)))
    }

    /// `beta_t` on `PM_p(Ghat) (x) M_n`, given as an operator on `[Ghat, n]`.
    pub fn beta_action(&self, t: usize, g: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.pm_inner.space();
        if g.row_space != space || g.col_space != space {
            return invalid("beta expects an operator on [Ghat, n]");
        }
        if t >= self.order() {
            return invalid("group element index out of range");
        }
        Ok(g.with_matrix(self.beta.apply(t, &g.matrix)))
    }

    /// `beta_t` on coefficients: `tau -> tau(t) alpha_t(g(tau))`.
    pub fn beta_coeffs(&self, t: usize, g: &[CMatrix]) -> Vec<CMatrix> {
        g.iter()
            .enumerate()
            .map(|(tau, a)| self.alpha.apply(t, a) * self.chars[(tau, t)])
            .collect()
    }

    // ---- Phi1 ----------------------------------------------------------------

    /// `Phi1(x) = W x W^{-1}`, from `[Ghat, G, n]` to `[G, Ghat, n]`.
    pub fn phi1_matrix(&self, x: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.double.space();
        if x.row_space != space || x.col_space != space {
            return invalid("Phi1 expects an operator on [Ghat, G, n]");
        }
        Ok(self.labeled(self.w.conjugate(&x.matrix), self.outer_beta.space()))
    }

    pub fn phi1(&self, f: &DoubleCcElement) -> Result<LabeledOperator> {
        self.phi1_matrix(&self.rep_double(f)?)
    }

    /// `Phi1` on coefficients: `y(s, gamma) = gamma(s) F(gamma, s)`.
    pub fn phi1_coeffs(&self, f: &DoubleCcElement) -> Result<DoubleCcElement> {
        self.check_double(f)?;
        let big_n = self.order();
        let mut y = DoubleCcElement::zero(self.group.clone(), self.n);
        for g in 0..big_n {
            for s in 0..big_n {
                y.set(s, g, f.get(g, s) * self.chars[(g, s)]);
            }
        }
        Ok(y)
    }

    /// Inverse of [`Self::phi1_coeffs`].
    pub fn phi1_coeffs_inverse(&self, y: &DoubleCcElement) -> Result<DoubleCcElement> {
        self.check_double(y)?;
        let big_n = self.order();
        let mut f = DoubleCcElement::zero(self.group.clone(), self.n);
        for g in 0..big_n {
            for s in 0..big_n {
                f.set(g, s, y.get(s, g) * self.chars[(g, s)].conj());
            }
        }
        Ok(f)
    }

    /// Regular representation of `W*_p(G, PM_p(Ghat) (x) M_n, beta)` on
    /// `[G, Ghat, n]` for coefficients `y(s, gamma)`.
    pub fn rep_outer_beta(&self, y: &DoubleCcElement) -> Result<LabeledOperator> {
        self.check_double(y)?;
        let coeffs = (0..self.order())
            .map(|s| {
                let g = CcElement::new(self.trivial_hat.clone(), y.row(s))?;
                self.pm_inner.integrated_matrix(&g)
            })
            .collect::<Result<Vec<_>>>()?;
        let outer = CcElement::new(self.beta.clone(), coeffs)?;
        Ok(self.labeled(self.outer_beta.integrated_matrix(&outer)?, self.outer_beta.space()))
    }

    // ---- Phi2 ----------------------------------------------------------------

    /// Largest entry of `[g, lambda(gamma) (x) I]` over the generators of
    /// `Ghat`, relative to the size of `g`. `g` acts on `[Ghat, n]`.
    pub fn translation_commutator(&self, g: &CMatrix) -> f64 {
        let scale = max_abs(g).max(1.0);
        let mut worst: f64 = 0.0;
        for gamma in self.generator_indices() {
            let l = self.pm_inner.lambda(gamma).matrix;
            let c = &l * g - g * &l;
            worst = worst.max(max_abs(&c) / scale);
        }
        worst
    }

    fn generator_indices(&self) -> Vec<usize> {
        let k = self.group.factors().len();
        (0..k)
            .map(|j| {
                let mut coords = vec![0; k];
                coords[j] = 1;
                self.group
                    .index_of(&crate::group::GroupElement { coords })
                    .expect("unit vector is an element")
            })
            .collect()
    }

    /// `Gamma_p (x) id`: `g -> (t -> (1/N) (e_t^* (x) I) g (e_t (x) I))` with
    /// `e_t(sigma) = sigma(t)`. Input on `[Ghat, n]`, must commute with the
    /// translations of `Ghat`.
    pub fn gelfand_tensor(&self, g: &CMatrix) -> Result<Vec<CMatrix>> {
        let big_n = self.order();
        let n = self.n;
        if g.shape() != (big_n * n, big_n * n) {
            return invalid("expected an operator on [Ghat, n]");
        }
        let comm = self.translation_commutator(g);
        if comm > STRUCTURE_TOL {
            return invalid(format!(
                "operator is not a convolution operator on the dual group (commutator {comm:.2e})"
            ));
        }
        let w = C64::new(1.0 / big_n as f64, 0.0);
        Ok((0..big_n)
            .map(|t| {
                let mut out = CMatrix::zeros(n, n);
                for a in 0..big_n {
                    let ca = self.chars[(a, t)].conj();
                    for b in 0..big_n {
                        let cb = self.chars[(b, t)];
                        let blk = g.view((a * n, b * n), (n, n));
                        out += blk * (ca * cb);
                    }
                }
                out * w
            })
            .collect())
    }

    /// Gelfand transform of an element of `PM_p(Ghat)` (an `N x N` operator).
    pub fn gelfand_gamma_p(&self, g: &LabeledOperator) -> Result<Vec<C64>> {
        if g.row_space != vec![IndexFactor::Dual(self.group.clone())] || g.col_space != g.row_space {
            return invalid("expected an operator on [Ghat]");
        }
        gelfand_gamma_p(&self.group, &g.matrix)
    }

    /// `Phi2 = (Gamma_p (x) id) x| id`, computed through the expectations of
    /// the outer crossed product and reassembled with `lt (x) alpha`.
    pub fn phi2(&self, y: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.outer_beta.space();
        if y.row_space != space || y.col_space != space {
            return invalid("Phi2 expects an operator on [G, Ghat, n]");
        }
        let d = self.phi2_coeffs(&y.matrix)?;
        self.rep_lt_alpha(&d)
    }

    /// Coefficients `D(s, t)` of `Phi2(y)`: `D(s, .) = Gamma_p (x) id (E_s(y))`.
    pub fn phi2_coeffs(&self, y: &CMatrix) -> Result<DoubleCcElement> {
        let big_n = self.order();
        let mut coeffs = Vec::with_capacity(big_n * big_n);
        for s in 0..big_n {
            let ys = self.outer_beta.expectation_matrix(y, s)?;
            coeffs.extend(self.gelfand_tensor(&ys)?);
        }
        DoubleCcElement::new(self.group.clone(), self.n, coeffs)
    }

    fn block_diag(&self, blocks: &[CMatrix]) -> CMatrix {
        let n = self.n;
        let mut m = CMatrix::zeros(blocks.len() * n, blocks.len() * n);
        for (t, b) in blocks.iter().enumerate() {
            m.view_mut((t * n, t * n), (n, n)).copy_from(b);
        }
        m
    }

    fn rep_with(&self, cp: &CrossedProduct, action: &Arc<GroupAction>, d: &DoubleCcElement) -> Result<LabeledOperator> {
        self.check_double(d)?;
        let coeffs = (0..self.order()).map(|s| self.block_diag(&d.row(s))).collect();
        let outer = CcElement::new(action.clone(), coeffs)?;
        Ok(self.labeled(cp.integrated_matrix(&outer)?, cp.space()))
    }

    /// Regular representation of `W*_p(G, l^inf(G) (x) M_n, lt (x) alpha)` for
    /// coefficients `D(s, t)`.
    pub fn rep_lt_alpha(&self, d: &DoubleCcElement) -> Result<LabeledOperator> {
        self.rep_with(&self.outer_lt_alpha, &self.lt_alpha, d)
    }

    pub fn rep_lt_id(&self, d: &DoubleCcElement) -> Result<LabeledOperator> {
        self.rep_with(&self.outer_lt_id, &self.lt_id, d)
    }

    /// Coefficients `D(s, t)` of an element of an `l^inf(G) (x) M_n` crossed
    /// product; the off-diagonal blocks of every `E_s` must vanish.
    fn split_diag(&self, cp: &CrossedProduct, m: &CMatrix) -> Result<DoubleCcElement> {
        let big_n = self.order();
        let n = self.n;
        let scale = max_abs(m).max(1.0);
        let mut coeffs = Vec::with_capacity(big_n * big_n);
        for s in 0..big_n {
            let e = cp.expectation_matrix(m, s)?;
            for a in 0..big_n {
                for b in 0..big_n {
                    if a != b {
                        let off = max_abs(&e.view((a * n, b * n), (n, n)).into_owned());
                        if off > STRUCTURE_TOL * scale {
                            return Err(Error::StructureViolation(format!(
                                "coefficient {s} is not in l^inf(G) (x) M_n (off-diagonal block {off:.2e})"
                            )));
                        }
                    }
                }
            }
            for t in 0..big_n {
                coeffs.push(e.view((t * n, t * n), (n, n)).into_owned());
            }
        }
        DoubleCcElement::new(self.group.clone(), n, coeffs)
    }

    pub fn lt_alpha_coeffs(&self, d: &LabeledOperator) -> Result<DoubleCcElement> {
        self.split_diag(&self.outer_lt_alpha, &d.matrix)
    }

    pub fn lt_id_coeffs(&self, d: &LabeledOperator) -> Result<DoubleCcElement> {
        self.split_diag(&self.outer_lt_id, &d.matrix)
    }

    // ---- Phi3 ----------------------------------------------------------------

    /// `Phi3(F)(s, t) = alpha_{-t}(F(s, t))`.
    pub fn phi3_coeffs(&self, d: &DoubleCcElement) -> DoubleCcElement {
        d.map(|_, t, m| self.alpha.apply(self.group.neg_idx(t), m))
    }

    pub fn phi3(&self, d: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.outer_lt_alpha.space();
        if d.row_space != space || d.col_space != space {
            return invalid("Phi3 expects an operator on [G, G, n]");
        }
        let coeffs = self.split_diag(&self.outer_lt_alpha, &d.matrix)?;
        self.rep_lt_id(&self.phi3_coeffs(&coeffs))
    }

    // ---- Phi4 ----------------------------------------------------------------

    /// Conjugate by `V` and collapse the scalar middle leg: `[G, G, n] -> [G, n]`.
    pub fn phi4(&self, d: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.outer_lt_id.space();
        if d.row_space != space || d.col_space != space {
            return invalid("Phi4 expects an operator on [G, G, n]");
        }
        let big_n = self.order();
        let n = self.n;
        let m = self.v.conjugate(&d.matrix);
        let scale = max_abs(&m).max(1.0);
        let idx = |r: usize, mid: usize, i: usize| (r * big_n + mid) * n + i;
        let mut k = CMatrix::zeros(big_n * n, big_n * n);
        for r in 0..big_n {
            for i in 0..n {
                for c in 0..big_n {
                    for j in 0..n {
                        k[(r * n + i, c * n + j)] = m[(idx(r, 0, i), idx(c, 0, j))];
                    }
                }
            }
        }
        let mut worst: f64 = 0.0;
        for r in 0..big_n {
            for m1 in 0..big_n {
                for i in 0..n {
                    for c in 0..big_n {
                        for m2 in 0..big_n {
                            for j in 0..n {
                                let want = if m1 == m2 { k[(r * n + i, c * n + j)] } else { C64::new(0.0, 0.0) };
                                worst = worst.max((m[(idx(r, m1, i), idx(c, m2, j))] - want).norm());
                            }
                        }
                    }
                }
            }
        }
        if worst > STRUCTURE_TOL * scale {
            return Err(Error::StructureViolation(format!(
                "middle leg is not scalar after conjugation by V (defect {worst:.2e})"
            )));
        }
        Ok(self.labeled(k, self.inner.space()))
    }

    // ---- composite -------------------------------------------------------------

    pub fn stages(&self, f: &DoubleCcElement) -> Result<ChainStages> {
        let source = self.rep_double(f)?;
        let after1 = self.phi1_matrix(&source)?;
        let after2 = self.phi2(&after1)?;
        let after3 = self.phi3(&after2)?;
        let after4 = self.phi4(&after3)?;
        Ok(ChainStages {
            source,
            after1,
            after2,
            after3,
            after4,
        })
    }

    pub fn phi_total(&self, f: &DoubleCcElement) -> Result<LabeledOperator> {
        Ok(self.stages(f)?.after4)
    }

    // ---- actions for equivariance ------------------------------------------------

    /// `alpha_hat_hat_t(F)(gamma, s) = conj(gamma(t)) F(gamma, s)`.
    pub fn double_dual_action(&self, t: usize, f: &DoubleCcElement) -> Result<DoubleCcElement> {
        self.check_double(f)?;
        Ok(f.map(|g, _, m| m * self.chars[(g, t)].conj()))
    }

    /// `rho(r) (x) u_r` with `rho(r) delta_t = delta_{t-r}`.
    pub fn rho_tensor_u(&self, r: usize) -> PhasedPermutation {
        let big_n = self.order();
        let rho = PhasedPermutation::permutation((0..big_n).map(|t| self.group.sub_idx(t, r)).collect())
            .expect("translation is a permutation");
        rho.kron(self.alpha.implementer(r))
    }

    /// `(Ad rho (x) alpha)_r(T)` on `[G, n]`.
    pub fn ad_rho_tensor_alpha(&self, r: usize, t: &LabeledOperator) -> Result<LabeledOperator> {
        let space = self.inner.space();
        if t.row_space != space || t.col_space != space {
            return invalid("expected an operator on [G, n]");
        }
        Ok(t.with_matrix(self.rho_tensor_u(r).conjugate(&t.matrix)))
    }

    /// `((rt (x) alpha) (x) id)_r` on coefficients: `D(s, t) -> alpha_r(D(s, t + r))`.
    pub fn rt_alpha_id_coeffs(&self, r: usize, d: &DoubleCcElement) -> DoubleCcElement {
        d.map(|s, t, _| self.alpha.apply(r, d.get(s, self.group.add_idx(t, r))))
    }

    pub fn rt_alpha_id(&self, r: usize, d: &LabeledOperator) -> Result<LabeledOperator> {
        let coeffs = self.lt_id_coeffs(d)?;
        self.rep_lt_id(&self.rt_alpha_id_coeffs(r, &coeffs))
    }

    /// Basis `E_{gamma, s, i, j}` of the double crossed product in coefficient form.
    pub fn coefficient_basis(&self) -> Vec<DoubleCcElement> {
        let big_n = self.order();
        let n = self.n;
        let mut out = Vec::with_capacity(big_n * big_n * n * n);
        for g in 0..big_n {
            for s in 0..big_n {
                for i in 0..n {
                    for j in 0..n {
                        let mut e = CMatrix::zeros(n, n);
                        e[(i, j)] = one();
                        out.push(
                            DoubleCcElement::point(self.group.clone(), n, g, s, e).expect("indices in range"),
                        );
                    }
                }
            }
        }
        out
    }

    /// Representation residual `|rep(F * H) - rep(F) rep(H)|`.
    pub fn double_hom_residual(&self, f: &DoubleCcElement, h: &DoubleCcElement) -> Result<f64> {
        let fh = self.double_convolve(f, h)?;
        let lhs = self.rep_double(&fh)?.matrix;
        let rhs = self.rep_double(f)?.matrix * self.rep_double(h)?.matrix;
        Ok(max_abs_diff(&lhs, &rhs))
    }
}

/// Gelfand transform on `PM_p(Ghat)`: for an `N x N` operator commuting with
/// the translations of `Ghat`, `t -> (1/N) e_t^* g e_t` with `e_t(sigma) = sigma(t)`.
/// On `g = sum_tau c(tau) (1/N) lambda(tau)` this is the Fourier transform of `c`.
pub fn gelfand_gamma_p(group: &FiniteAbelianGroup, g: &CMatrix) -> Result<Vec<C64>> {
    let big_n = group.order();
    if g.shape() != (big_n, big_n) {
        return invalid(format!("expected a {big_n}x{big_n} operator"));
    }
    let chars = group.character_table();
    let scale = max_abs(g).max(1.0);
    for j in 0..group.factors().len() {
        let mut coords = vec![0; group.factors().len()];
        coords[j] = 1;
        let gamma = group.index_of(&crate::group::GroupElement { coords })?;
        let mut l = CMatrix::zeros(big_n, big_n);
        for s in 0..big_n {
            l[(group.add_idx(gamma, s), s)] = one();
        }
        let c = &l * g - g * &l;
        if max_abs(&c) > STRUCTURE_TOL * scale {
            return invalid("operator does not commute with the translations of the dual group");
        }
    }
    let w = 1.0 / big_n as f64;
    Ok((0..big_n)
        .map(|t| {
            let e = nalgebra::DVector::from_fn(big_n, |s, _| chars[(s, t)]);
            (e.adjoint() * g * &e)[(0, 0)] * w
        })
        .collect())
}

/// The four intermediate operators of the chain for one element.
#[derive(Clone, Debug)]
pub struct ChainStages {
    pub source: LabeledOperator,
    pub after1: LabeledOperator,
    pub after2: LabeledOperator,
    pub after3: LabeledOperator,
    pub after4: LabeledOperator,
}

impl ChainStages {
    pub fn all(&self) -> [&LabeledOperator; 5] {
        [&self.source, &self.after1, &self.after2, &self.after3, &self.after4]
    }
}
