//! Certified upper bounds on `||A||_{p->p}`.

use num_complex::Complex64 as C64;

use super::labeled::{CMatrix, PExponent};
use super::power::{power_lower, vector_pnorm, CVector, PowerOptions};
use crate::error::{Error, Result};

pub const GRID_MAX_DIM: usize = 4;
/// Survivor cap per refinement level. Once a level exceeds it the bound of
/// that level is returned as is.
pub const GRID_MAX_BOXES: usize = 400_000;

/// Max column sum `||A||_1`.
pub fn norm_one(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Max row sum `||A||_inf`.
pub fn norm_inf(a: &CMatrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||A||_1^{1/p} ||A||_inf^{1/q}`.
pub fn riesz_thorin(a: &CMatrix, p: PExponent) -> f64 {
    let n1 = norm_one(a);
    let ninf = norm_inf(a);
    if n1 == 0.0 || ninf == 0.0 {
        return 0.0;
    }
    n1.powf(1.0 / p.p()) * ninf.powf(1.0 / p.q())
}

#[derive(Clone, Debug)]
pub struct GridBound {
    pub upper: f64,
    /// Best ratio attained at a box center or by the seeding power run.
    pub lower: f64,
    pub witness: CVector,
    /// Refinement level the bound was taken at.
    pub depth_reached: usize,
    pub boxes_left: usize,
}

#[derive(Clone)]
struct GridBox {
    face: usize,
    // (lo, hi) for re/im of every free coordinate, in coordinate order
    iv: Vec<(f64, f64)>,
    ub: f64,
}

struct Grid<'a> {
    a: &'a CMatrix,
    abs: Vec<Vec<f64>>,
    p: PExponent,
    n: usize,
}

impl Grid<'_> {
    fn free(&self, face: usize) -> impl Iterator<Item = usize> {
        (0..self.n).filter(move |&j| j != face)
    }

    fn center(&self, b: &GridBox) -> CVector {
        let mut x = CVector::zeros(self.n);
        x[b.face] = C64::new(1.0, 0.0);
        for (slot, j) in self.free(b.face).enumerate() {
            let (rl, rh) = b.iv[2 * slot];
            let (il, ih) = b.iv[2 * slot + 1];
            x[j] = C64::new(0.5 * (rl + rh), 0.5 * (il + ih));
        }
        x
    }

    /// Upper bound of `||Ax||_p / ||x||_p` over the box, or `None` when the
    /// box lies outside the unit disk in some coordinate.
    fn bound(&self, b: &GridBox, c: &CVector) -> Option<f64> {
        let p = self.p.p();
        let mut rho = vec![0.0; self.n];
        let mut denom = 1.0;
        for (slot, j) in self.free(b.face).enumerate() {
            let (rl, rh) = b.iv[2 * slot];
            let (il, ih) = b.iv[2 * slot + 1];
            let hr = 0.5 * (rh - rl);
            let hi = 0.5 * (ih - il);
            rho[j] = hr.hypot(hi);
            let dr = if rl > 0.0 { rl } else if rh < 0.0 { -rh } else { 0.0 };
            let di = if il > 0.0 { il } else if ih < 0.0 { -ih } else { 0.0 };
            let d = dr.hypot(di);
            if d > 1.0 {
                return None;
            }
            denom += d.powf(p);
        }
        let ac = self.a * c;
        let u: Vec<C64> = (0..self.a.nrows())
            .map(|i| {
                let spread: f64 = (0..self.n).map(|j| self.abs[i][j] * rho[j]).sum();
                C64::new(ac[i].norm() + spread, 0.0)
            })
            .collect();
        Some(vector_pnorm(&u, self.p) / denom.powf(1.0 / p))
    }
}

fn ratio(a: &CMatrix, x: &CVector, p: PExponent) -> f64 {
    let nx = vector_pnorm(x.as_slice(), p);
    if nx == 0.0 {
        0.0
    } else {
        vector_pnorm((a * x).as_slice(), p) / nx
    }
}

/// Branch-and-bound covering of the unit sphere.
///
/// Every nonzero `x` can be rescaled so that a coordinate of maximal modulus
/// equals 1; the remaining coordinates then lie in the unit disk. Each such
/// face is covered by boxes in `[-1,1]^2` per free coordinate, and each
/// refinement level bisects every surviving box along its widest side. A box
/// survives while its bound exceeds the best attained ratio. The result at
/// `depth` is the largest surviving bound, capped by the Riesz-Thorin value.
pub fn grid_upper(a: &CMatrix, p: PExponent, depth: usize) -> Result<GridBound> {
    let dim = a.nrows().max(a.ncols());
    if dim > GRID_MAX_DIM {
        return Err(Error::UnsupportedDimension { dim, max: GRID_MAX_DIM });
    }
    let n = a.ncols();
    let rt = riesz_thorin(a, p);
    if n == 0 || rt == 0.0 {
        return Ok(GridBound {
            upper: 0.0,
            lower: 0.0,
            witness: CVector::zeros(n),
            depth_reached: 0,
            boxes_left: 0,
        });
    }
    let grid = Grid {
        a,
        abs: (0..a.nrows())
            .map(|i| (0..n).map(|j| a[(i, j)].norm()).collect())
            .collect(),
        p,
        n,
    };
    let (mut best, mut witness) = power_lower(a, p, &PowerOptions::default());

    let mut level: Vec<GridBox> = Vec::new();
    for face in 0..n {
        let mut b = GridBox {
            face,
            iv: vec![(-1.0, 1.0); 2 * (n - 1)],
            ub: f64::INFINITY,
        };
        let c = grid.center(&b);
        if let Some(ub) = grid.bound(&b, &c) {
            let r = ratio(a, &c, p);
            if r > best {
                best = r;
                witness = c;
            }
            b.ub = ub;
            level.push(b);
        }
    }
    let mut reached = 0;
    for d in 1..=depth {
        if level.iter().all(|b| b.iv.is_empty()) || level.len() > GRID_MAX_BOXES {
            break;
        }
        let mut next = Vec::with_capacity(2 * level.len());
        for b in &level {
            if b.ub <= best {
                continue;
            }
            if b.iv.is_empty() {
                next.push(b.clone());
                continue;
            }
            let (k, _) = b
                .iv
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (k, (lo, hi))| if hi - lo > acc.1 { (k, hi - lo) } else { acc });
            let (lo, hi) = b.iv[k];
            let mid = 0.5 * (lo + hi);
            for half in [(lo, mid), (mid, hi)] {
                let mut child = GridBox {
                    face: b.face,
                    iv: b.iv.clone(),
                    ub: b.ub,
                };
                child.iv[k] = half;
                let c = grid.center(&child);
                if let Some(ub) = grid.bound(&child, &c) {
                    let r = ratio(a, &c, p);
                    if r > best {
                        best = r;
                        witness = c;
                    }
                    child.ub = ub.min(b.ub);
                    next.push(child);
                }
            }
        }
        next.retain(|b| b.ub > best);
        level = next;
        reached = d;
    }
    let top = level.iter().map(|b| b.ub).fold(best, f64::max);
    Ok(GridBound {
        upper: top.min(rt).max(best),
        lower: best,
        witness,
        depth_reached: reached,
        boxes_left: level.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn riesz_thorin_examples() {
        let p3 = PExponent::new(3.0).unwrap();
        let perm = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)];
        assert!((riesz_thorin(&perm, p3) - 1.0).abs() < 1e-15);
        let m = dmatrix![c(1.0, 0.0), c(0.0, 1.0); c(0.0, 1.0), c(1.0, 0.0)];
        assert!((riesz_thorin(&m, p3) - 2.0).abs() < 1e-15);
        let d = dmatrix![c(3.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(1.0, 0.0)];
        assert!((riesz_thorin(&d, PExponent::two()) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_large() {
        let a = CMatrix::identity(5, 5);
        assert!(matches!(
            grid_upper(&a, PExponent::two(), 3),
            Err(Error::UnsupportedDimension { dim: 5, max: 4 })
        ));
    }

    #[test]
    fn grid_identity_and_swap() {
        let p = PExponent::new(1.5).unwrap();
        let id = CMatrix::identity(2, 2);
        let g = grid_upper(&id, p, 10).unwrap();
        assert!(g.upper <= 1.0 + 1e-6 && g.upper >= 1.0 - 1e-12);
        let perm = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)];
        let g = grid_upper(&perm, PExponent::new(3.0).unwrap(), 10).unwrap();
        assert!(g.upper <= 1.0 + 1e-6);
    }

    #[test]
    fn grid_is_monotone_in_depth() {
        let p = PExponent::new(3.0).unwrap();
        let m = dmatrix![c(1.0, 0.0), c(0.0, 1.0); c(0.0, 1.0), c(1.0, 0.0)];
        let mut prev = f64::INFINITY;
        for d in [0, 2, 4, 8, 12, 16] {
            let g = grid_upper(&m, p, d).unwrap();
            assert!(g.upper <= prev + 1e-15);
            assert!(g.upper >= g.lower);
            prev = g.upper;
        }
    }
}
