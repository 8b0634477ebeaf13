//! Hermitian elements via the exponential criterion and C*-cores of
//! finite-dimensional subalgebras of `B(l^p_n)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pnorm::{estimate_norm, riesz_thorin, CMatrix, EstimateOptions, LabeledOperator, PExponent};

pub const HERMITIAN_TOL: f64 = 1e-7;
const NULL_TOL: f64 = 1e-9;

/// Evidence for or against `||exp(i t a)||_p = 1` for all real `t`.
#[derive(Clone, Debug, Serialize)]
pub struct HermitianCertificate {
    #[serde(skip)]
    pub element: LabeledOperator,
    pub t_grid: Vec<f64>,
    /// `max_t (lower bound of ||exp(i t a)||_p) - 1`; lower bounds are
    /// attained, so a positive value is a certified violation.
    pub max_exp_norm_defect: f64,
    pub worst_t: f64,
    pub hermitian: bool,
}

fn t_grid(a: &CMatrix, p: PExponent) -> Vec<f64> {
    let n = a.nrows();
    let mean = (0..n).map(|i| a[(i, i)]).sum::<C64>() / n.max(1) as f64;
    let centered = a - CMatrix::identity(n, n) * mean;
    let s = riesz_thorin(&centered, p).max(1.0);
    let mut ts = Vec::new();
    for k in 1..=16 {
        ts.push(k as f64 * PI / (8.0 * s));
    }
    for k in 1..=10 {
        ts.push(0.5f64.powi(k) / s);
    }
    let neg: Vec<f64> = ts.iter().map(|t| -t).collect();
    ts.extend(neg);
    ts
}

pub fn hermitian_test(a: &LabeledOperator) -> Result<HermitianCertificate> {
    if !a.is_square() {
        return invalid("hermitian test needs a square operator");
    }
    let opts = EstimateOptions::fast();
    let grid = t_grid(&a.matrix, a.p);
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for &t in &grid {
        let e = (&a.matrix * C64::new(0.0, t)).exp();
        let d = estimate_norm(&e, a.p, &opts).lower - 1.0;
        if d > worst.0 {
            worst = (d, t);
        }
    }
    Ok(HermitianCertificate {
        element: a.clone(),
        t_grid: grid,
        max_exp_norm_defect: worst.0,
        worst_t: worst.1,
        hermitian: worst.0 <= HERMITIAN_TOL,
    })
}

#[derive(Clone, Debug)]
pub struct CoreResult {
    pub basis: Vec<LabeledOperator>,
    pub certificates: Vec<HermitianCertificate>,
}

/// Right null space of a real matrix, as columns.
fn null_space(c: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = c.ncols();
    let mut padded = DMatrix::<f64>::zeros(c.nrows().max(cols), cols);
    padded.view_mut((0, 0), c.shape()).copy_from(c);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max).max(1.0);
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= NULL_TOL * smax)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, k| vt[(keep[k], r)])
}

fn complex_rank(vectors: &[Vec<C64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(vectors[0].len(), vectors.len(), |r, c| vectors[c][r]);
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > NULL_TOL * smax.max(1.0)).count()
}

/// `core(A) = A_h + i A_h` for the span `A` of `algebra_basis`.
///
/// Hermitian elements of a unital subalgebra are those of the ambient
/// `B(l^p_n)`: real diagonal matrices when `p != 2`, self-adjoint matrices
/// when `p = 2`. The returned basis consists of hermitian elements.
pub fn core_compute(algebra_basis: &[LabeledOperator]) -> Result<Vec<LabeledOperator>> {
    Ok(core_compute_certified(algebra_basis)?.basis)
}

pub fn core_compute_certified(algebra_basis: &[LabeledOperator]) -> Result<CoreResult> {
    let first = algebra_basis
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty algebra basis".into()))?;
    let p = first.p;
    let n = first.dim();
    if algebra_basis
        .iter()
        .any(|b| !b.is_square() || b.dim() != n || b.p != p || b.row_space != first.row_space)
    {
        return invalid("basis elements must be square operators on the same space at the same p");
    }
    let m = algebra_basis.len();
    // identity must lie in the span
    let span = DMatrix::from_fn(n * n, m, |r, c| algebra_basis[c].matrix.as_slice()[r]);
    let id = nalgebra::DVector::from_column_slice(CMatrix::identity(n, n).as_slice());
    let coef = span
        .clone()
        .svd(true, true)
        .solve(&id, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    if (&span * &coef - &id).iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-9 {
        return invalid("the span of the basis does not contain the identity");
    }

    // real unknowns x = (Re c_1, Im c_1, ...); a = sum c_k B_k
    let entry = |i: usize, j: usize, k: usize| algebra_basis[k].matrix[(i, j)];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let push_complex = |coef: &dyn Fn(usize) -> C64| {
        // Re and Im of sum_k coef(k) c_k, as linear forms in x
        let mut re = vec![0.0; 2 * m];
        let mut im = vec![0.0; 2 * m];
        for k in 0..m {
            let z = coef(k);
            re[2 * k] = z.re;
            re[2 * k + 1] = -z.im;
            im[2 * k] = z.im;
            im[2 * k + 1] = z.re;
        }
        (re, im)
    };
    for i in 0..n {
        for j in 0..n {
            if p.is_two() {
                if j < i {
                    continue;
                }
                // a_ij - conj(a_ji) = 0
                let (re1, im1) = push_complex(&|k| entry(i, j, k));
                let (re2, im2) = push_complex(&|k| entry(j, i, k));
                rows.push(re1.iter().zip(&re2).map(|(a, b)| a - b).collect());
                rows.push(im1.iter().zip(&im2).map(|(a, b)| a + b).collect());
            } else if i == j {
                let (_, im) = push_complex(&|k| entry(i, i, k));
                rows.push(im);
            } else {
                let (re, im) = push_complex(&|k| entry(i, j, k));
                rows.push(re);
                rows.push(im);
            }
        }
    }
    let c = DMatrix::from_fn(rows.len(), 2 * m, |r, k| rows[r][k]);
    let null = null_space(&c);

    let mut chosen: Vec<CMatrix> = Vec::new();
    let mut vecs: Vec<Vec<C64>> = Vec::new();
    for col in 0..null.ncols() {
        let mut h = CMatrix::zeros(n, n);
        for k in 0..m {
            let ck = C64::new(null[(2 * k, col)], null[(2 * k + 1, col)]);
            h += &algebra_basis[k].matrix * ck;
        }
        // hermitian elements are real up to round-off in the relevant sense
        let h = if p.is_two() {
            (&h + h.adjoint()) * C64::new(0.5, 0.0)
        } else {
            CMatrix::from_diagonal(&h.diagonal().map(|z| C64::new(z.re, 0.0)))
        };
        let v: Vec<C64> = h.iter().copied().collect();
        vecs.push(v);
        if complex_rank(&vecs) > chosen.len() {
            chosen.push(h);
        } else {
            vecs.pop();
        }
    }
    let mut basis = Vec::with_capacity(chosen.len());
    let mut certificates = Vec::with_capacity(chosen.len());
    for h in chosen {
        let op = first.with_matrix(h);
        let cert = hermitian_test(&op)?;
        if !cert.hermitian {
            return Err(Error::StructureViolation(format!(
                "core candidate failed the hermitian test (defect {:.3e} at t={:.4})",
                cert.max_exp_norm_defect, cert.worst_t
            )));
        }
        basis.push(op);
        certificates.push(cert);
    }
    Ok(CoreResult { basis, certificates })
}
