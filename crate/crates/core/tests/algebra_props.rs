mod common;

use lpdl_core::algebra::{core_compute, hermitian_test};
use lpdl_core::pnorm::{
    estimate_norm, improve_lower, riesz_thorin, CMatrix, CVector, EstimateOptions, LabeledOperator,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;

fn as_col(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn as_vec(m: CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn units(n: usize, p: f64) -> Vec<LabeledOperator> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut m = CMatrix::zeros(n, n);
            m[(i, j)] = C64::new(1.0, 0.0);
            out.push(LabeledOperator::plain(m, common::p_of(p)).unwrap());
        }
    }
    out
}

/// Distance from `x` to the complex span of `basis`, by least squares.
fn span_distance(basis: &[LabeledOperator], x: &CMatrix) -> f64 {
    let len = x.len();
    let a = DMatrix::from_fn(len, basis.len(), |r, c| basis[c].matrix.as_slice()[r]);
    let b = nalgebra::DVector::from_column_slice(x.as_slice());
    let coef = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
    (a * coef - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn action_preserves_estimated_norms(
        cfg in 0..common::CONFIGS.len(),
        seed in any::<u64>(),
        p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)],
    ) {
        let (g, n, lit) = common::CONFIGS[cfg];
        let al = common::action(g, n, lit);
        let p = common::p_of(p);
        let mut rng = common::rng(seed);
        let a = common::random_matrix(&mut rng, n, n);
        let t = rng.gen_range(0..al.group().order());
        let b = al.apply(t, &a);
        let u = al.implementer(t);
        let opts = EstimateOptions::fast();
        let mut ea = estimate_norm(&a, p, &opts);
        let mut eb = estimate_norm(&b, p, &opts);
        // b (u x) = u (a x), so witnesses move with u
        let fwd = as_vec(u.apply_left(&as_col(&ea.witness)));
        let back = as_vec(u.inverse().apply_left(&as_col(&eb.witness)));
        improve_lower(&mut eb, &b, p, &[fwd]);
        improve_lower(&mut ea, &a, p, &[back]);
        let scale = ea.lower.max(1e-300);
        prop_assert!((ea.lower - eb.lower).abs() <= 1e-9 * scale, "{} vs {}", ea.lower, eb.lower);
        prop_assert!((riesz_thorin(&a, p) - riesz_thorin(&b, p)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn core_of_matrix_algebra(n in 1usize..=3, p in prop_oneof![Just(1.5), Just(2.0), Just(3.0), Just(4.0)]) {
        let core = core_compute(&units(n, p)).unwrap();
        let want = if p == 2.0 { n * n } else { n };
        prop_assert_eq!(core.len(), want);
        for x in &core {
            for y in &core {
                let xy = &x.matrix * &y.matrix;
                prop_assert!(span_distance(&core, &xy) <= 1e-10);
            }
        }
        let id = CMatrix::identity(n, n);
        prop_assert!(span_distance(&core, &id) <= 1e-10);
    }

    #[test]
    fn hermitian_defect_is_translation_invariant(
        seed in any::<u64>(),
        n in 1usize..=3,
        r in -3.0f64..3.0,
        p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)],
        kind in 0usize..3,
    ) {
        let mut rng = common::rng(seed);
        let m = match kind {
            // real diagonal: hermitian for every p
            0 => CMatrix::from_diagonal(&CVector::from_fn(n, |_, _| C64::new(rng.gen_range(-2.0..2.0), 0.0))),
            // self-adjoint: hermitian at p = 2 only
            1 => {
                let x = common::random_matrix(&mut rng, n, n);
                (&x + x.adjoint()) * C64::new(0.5, 0.0)
            }
            _ => common::random_matrix(&mut rng, n, n),
        };
        let p = common::p_of(p);
        let a = LabeledOperator::plain(m.clone(), p).unwrap();
        let shifted = LabeledOperator::plain(&m + CMatrix::identity(n, n) * C64::new(r, 0.0), p).unwrap();
        let c0 = hermitian_test(&a).unwrap();
        let c1 = hermitian_test(&shifted).unwrap();
        prop_assert!((c0.max_exp_norm_defect - c1.max_exp_norm_defect).abs() <= 1e-9,
            "{} vs {}", c0.max_exp_norm_defect, c1.max_exp_norm_defect);
        prop_assert_eq!(c0.hermitian, c1.hermitian);
        if kind == 0 {
            prop_assert!(c0.hermitian);
        }
    }
}
