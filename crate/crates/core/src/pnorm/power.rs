//! Dual-pairing fixed-point iteration for lower bounds on `||A||_{p->p}`.
//!
//! Each step maps `x -> y = A x`, takes the norming functional `c` of `y` in
//! `l^q`, pulls it back through `A^T` and replaces `x` by the norming vector of
//! `A^T c` in `l^p`. The estimate `||A x||_p` never decreases along a run, and
//! every iterate is a witness: the returned value is attained by the returned
//! vector.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::labeled::{CMatrix, PExponent};

pub type CVector = DVector<C64>;

#[derive(Clone, Debug)]
pub struct PowerOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 2000,
            tol: 1e-12,
            seed: 0x5eed_1a2b,
        }
    }
}

/// `l^p` norm, scaled by the largest modulus to avoid overflow.
pub fn vector_pnorm(x: &[C64], p: PExponent) -> f64 {
    let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|z| (z.norm() / m).powf(p.p())).sum();
    m * s.powf(1.0 / p.p())
}

/// The functional `c` with `||c||_q = 1` and `sum_i c_i y_i = ||y||_p`.
pub fn norming_functional(y: &CVector, p: PExponent) -> CVector {
    let ny = vector_pnorm(y.as_slice(), p);
    if ny == 0.0 {
        return CVector::zeros(y.len());
    }
    y.map(|yi| {
        let u = yi / ny;
        let r = u.norm();
        if r == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            u.conj() / r * r.powf(p.p() - 1.0)
        }
    })
}

fn ratio(a: &CMatrix, x: &CVector, p: PExponent) -> f64 {
    let nx = vector_pnorm(x.as_slice(), p);
    if nx == 0.0 {
        return 0.0;
    }
    vector_pnorm((a * x).as_slice(), p) / nx
}

/// One run from `x0`; returns the best ratio seen and its witness.
pub fn power_run(a: &CMatrix, p: PExponent, x0: &CVector, opts: &PowerOptions) -> (f64, CVector) {
    let q = p.conjugate();
    let nx = vector_pnorm(x0.as_slice(), p);
    if nx == 0.0 {
        return (0.0, x0.clone());
    }
    let mut x = x0 / C64::new(nx, 0.0);
    let mut est = ratio(a, &x, p);
    let mut best = (est, x.clone());
    for _ in 0..opts.max_iter {
        let y = a * &x;
        if vector_pnorm(y.as_slice(), p) == 0.0 {
            break;
        }
        let c = norming_functional(&y, p);
        let z = a.tr_mul(&c);
        // norming vector of z in l^q, viewed as an element of the unit l^p sphere
        let x_new = norming_functional(&z, q);
        if vector_pnorm(x_new.as_slice(), p) == 0.0 {
            break;
        }
        let est_new = ratio(a, &x_new, p);
        if est_new > best.0 {
            best = (est_new, x_new.clone());
        }
        let improved = est_new - est;
        x = x_new;
        est = est_new;
        if improved <= opts.tol * est.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    best
}

/// Best ratio over deterministic starts (all-ones, coordinate vectors for
/// small dimensions) plus `opts.restarts` seeded random complex starts.
pub fn power_lower(a: &CMatrix, p: PExponent, opts: &PowerOptions) -> (f64, CVector) {
    let n = a.ncols();
    if n == 0 || a.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return (0.0, CVector::zeros(n));
    }
    let mut starts = vec![CVector::from_element(n, C64::new(1.0, 0.0))];
    if n <= 8 {
        for j in 0..n {
            let mut e = CVector::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            starts.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        starts.push(CVector::from_fn(n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }));
    }
    starts
        .iter()
        .map(|x0| power_run(a, p, x0, opts))
        .fold((0.0, CVector::zeros(n)), |acc, cand| if cand.0 > acc.0 { cand } else { acc })
}
