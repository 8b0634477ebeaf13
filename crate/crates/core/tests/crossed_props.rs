mod common;

use std::sync::Arc;

use lpdl_core::algebra::GroupAction;
use lpdl_core::crossed::{CcElement, CrossedProduct};
use lpdl_core::group::FiniteAbelianGroup;
use lpdl_core::pnorm::{
    estimate_norm, improve_lower, max_abs, max_abs_diff, CMatrix, CVector, EstimateOptions, PExponent,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;

fn cfg_strategy() -> impl Strategy<Value = (usize, f64)> {
    (0..common::CONFIGS.len(), prop_oneof![Just(1.5), Just(2.0), Just(3.0)])
}

fn crossed(cfg: usize, p: f64) -> CrossedProduct {
    let (g, n, lit) = common::CONFIGS[cfg];
    CrossedProduct::standard(common::action(g, n, lit), common::p_of(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integrated_form_is_multiplicative((cfg, p) in cfg_strategy(), seed in any::<u64>()) {
        let cp = crossed(cfg, p);
        let mut rng = common::rng(seed);
        let f = CcElement::random(cp.action().clone(), &mut rng);
        let g = CcElement::random(cp.action().clone(), &mut rng);
        let lhs = cp.integrated_matrix(&cp.convolve(&f, &g).unwrap()).unwrap();
        let rhs = cp.integrated_matrix(&f).unwrap() * cp.integrated_matrix(&g).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn expectations_recover_coefficients((cfg, p) in cfg_strategy(), seed in any::<u64>()) {
        let cp = crossed(cfg, p);
        let mut rng = common::rng(seed);
        let f = CcElement::random(cp.action().clone(), &mut rng);
        let rep = cp.integrated_form(&f).unwrap().ambient;
        prop_assert!(cp.reconstruct(&rep).unwrap().max_abs_diff(&f) <= 1e-12);
        prop_assert!(cp.span_residual(&rep.matrix).unwrap() <= 1e-12);
    }

    #[test]
    fn single_point_support_is_isometric((cfg, p) in cfg_strategy(), seed in any::<u64>()) {
        let cp = crossed(cfg, p);
        let al = cp.action().clone();
        let g = al.group().clone();
        let (big_n, d) = (g.order(), al.degree());
        let mut rng = common::rng(seed);
        let s = rng.gen_range(0..big_n);
        let a = common::random_matrix(&mut rng, d, d);
        let x = cp.integrated_matrix(&CcElement::point(al.clone(), s, a.clone()).unwrap()).unwrap();
        let p = cp.p();
        let opts = EstimateOptions::fast();
        let mut ea = estimate_norm(&a, p, &opts);
        let mut ex = estimate_norm(&x, p, &opts);
        let col = |v: &CVector| CMatrix::from_column_slice(v.len(), 1, v.as_slice());
        // column block c of x is alpha_{-(c+s)}(a) placed in row block c+s
        let mut fwd = CVector::zeros(big_n * d);
        let moved = al.implementer(g.neg_idx(s)).apply_left(&col(&ea.witness));
        for i in 0..d {
            fwd[i] = moved[(i, 0)];
        }
        let back: Vec<CVector> = (0..big_n)
            .map(|c| {
                let slice = CVector::from_fn(d, |i, _| ex.witness[c * d + i]);
                let u = al.implementer(g.neg_idx(g.add_idx(c, s)));
                CVector::from_column_slice(u.inverse().apply_left(&col(&slice)).as_slice())
            })
            .collect();
        improve_lower(&mut ex, &x, p, &[fwd]);
        improve_lower(&mut ea, &a, p, &back);
        prop_assert!((ea.lower - ex.lower).abs() <= 1e-8 * ea.lower.max(1.0), "{} vs {}", ea.lower, ex.lower);
    }

    #[test]
    fn expectation_is_contractive((cfg, p) in cfg_strategy(), seed in any::<u64>()) {
        let cp = crossed(cfg, p);
        let mut rng = common::rng(seed);
        let f = CcElement::random(cp.action().clone(), &mut rng);
        let m = cp.integrated_matrix(&f).unwrap();
        let ef = estimate_norm(&m, cp.p(), &EstimateOptions::fast());
        let opts = EstimateOptions { grid_depth: Some(16), ..EstimateOptions::fast() };
        for t in 0..cp.group().order() {
            let e = cp.expectation_matrix(&m, t).unwrap();
            let ee = estimate_norm(&e, cp.p(), &opts);
            prop_assert!(ee.upper <= ef.lower * (1.0 + 1e-9), "t={t}: {} > {}", ee.upper, ef.lower);
        }
    }

    #[test]
    fn trivial_scalar_crossed_product_commutes_with_right_translations(
        factors in prop::collection::vec(1usize..=4, 1..=2),
        seed in any::<u64>(),
    ) {
        let g = FiniteAbelianGroup::new(factors).unwrap();
        let big_n = g.order();
        let al = Arc::new(GroupAction::trivial(g.clone(), 1));
        let cp = CrossedProduct::standard(al.clone(), PExponent::new(3.0).unwrap());
        let mut rng = common::rng(seed);
        let x = cp.integrated_matrix(&CcElement::random(al, &mut rng)).unwrap();
        for s in 0..big_n {
            // rho(s) delta_r = delta_{r - s}
            let rho = CMatrix::from_fn(big_n, big_n, |r, c| {
                if r == g.sub_idx(c, s) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            });
            prop_assert!(max_abs_diff(&(&x * &rho), &(&rho * &x)) <= 1e-12);
        }
        prop_assert_eq!(cp.basis().len(), big_n);
    }
}
