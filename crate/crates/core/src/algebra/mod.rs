//! Operators on labeled `l^p` tensor spaces: Kronecker products, actions by
//! phased permutations, multiplication operators, hermitian detection and
//! C*-cores.

mod action;
mod hermitian;

pub use action::{GroupAction, PhasedPermutation};
pub use hermitian::{core_compute, core_compute_certified, hermitian_test, CoreResult, HermitianCertificate, HERMITIAN_TOL};

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::pnorm::{space_size, CMatrix, IndexFactor, LabeledOperator, PExponent};

/// `A (x) B`, left factor slowest; labels are concatenated.
pub fn kron(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    if a.p != b.p {
        return invalid(format!("kron of operators normed at p={} and p={}", a.p, b.p));
    }
    let mut row_space = a.row_space.clone();
    row_space.extend(b.row_space.iter().cloned());
    let mut col_space = a.col_space.clone();
    col_space.extend(b.col_space.iter().cloned());
    LabeledOperator::new(a.matrix.kronecker(&b.matrix), row_space, col_space, a.p)
}

/// Diagonal operator `M_f` on the given space.
pub fn multiplication_operator(f: &[C64], space: Vec<IndexFactor>, p: PExponent) -> Result<LabeledOperator> {
    if f.len() != space_size(&space) {
        return invalid(format!("{} values for a space of dimension {}", f.len(), space_size(&space)));
    }
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(f));
    LabeledOperator::square(m, space, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteAbelianGroup;
    use crate::pnorm::max_abs_diff;

    fn unit(n: usize, i: usize, j: usize) -> LabeledOperator {
        let mut m = CMatrix::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        LabeledOperator::plain(m, PExponent::two()).unwrap()
    }

    #[test]
    fn kron_examples() {
        let p = PExponent::new(3.0).unwrap();
        let i2 = LabeledOperator::identity(vec![IndexFactor::Plain(2)], p);
        let i3 = LabeledOperator::identity(vec![IndexFactor::Plain(3)], p);
        let k = kron(&i2, &i3).unwrap();
        assert_eq!(k.matrix, CMatrix::identity(6, 6));
        assert_eq!(k.row_space, vec![IndexFactor::Plain(2), IndexFactor::Plain(3)]);

        let k = kron(&unit(2, 1, 1), &unit(3, 2, 2)).unwrap();
        // row (1, 2) of [2, 3] is 3 + 2
        assert_eq!(k.matrix[(5, 5)], C64::new(1.0, 0.0));
        assert_eq!(k.matrix.iter().filter(|z| z.norm() > 0.0).count(), 1);

        assert!(kron(&i2, &unit(2, 0, 0)).is_err());
    }

    #[test]
    fn multiplication_operator_is_character_twist() {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let p = PExponent::new(1.5).unwrap();
        let f: Vec<C64> = (0..4).map(|s| g.pairing_idx(1, s).conj()).collect();
        let v = multiplication_operator(&f, vec![IndexFactor::Group(g.clone())], p).unwrap();
        for s in 0..4 {
            assert!((v.matrix[(s, s)] - g.pairing_idx(1, s).conj()).norm() < 1e-15);
        }
        let one = multiplication_operator(&[C64::new(1.0, 0.0); 4], vec![IndexFactor::Group(g)], p).unwrap();
        assert!(max_abs_diff(&one.matrix, &CMatrix::identity(4, 4)) == 0.0);
    }
}
