mod common;

use std::sync::Arc;

use lpdl_core::algebra::PhasedPermutation;
use lpdl_core::crossed::CcElement;
use lpdl_core::duality::{
    element_record, equivariance_check, gelfand_gap_witness, ChainOptions, DoubleCcElement, DualityChain,
    EQUIVARIANCE_TOL,
};
use lpdl_core::pnorm::{max_abs_diff, LabeledOperator, Verdict};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;

fn chain(cfg: usize, p: f64) -> DualityChain {
    let (g, n, lit) = common::CONFIGS[cfg];
    DualityChain::new(common::action(g, n, lit), common::p_of(p)).unwrap()
}

fn labels(ch: &DualityChain, f: &DoubleCcElement) -> Vec<&'static str> {
    let rec = element_record(ch, 0, "t", f, &ChainOptions::default()).unwrap();
    rec.verdicts.iter().map(Verdict::label).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn isometric_links_hold_at_every_p(cfg in 0..common::CONFIGS.len(), p in prop_oneof![Just(1.5), Just(2.0), Just(3.0), 1.2f64..5.0], seed in any::<u64>()) {
        let ch = chain(cfg, p);
        let mut rng = common::rng(seed);
        let f = DoubleCcElement::random(ch.group().clone(), ch.degree(), &mut rng);
        let rec = element_record(&ch, 0, "random", &f, &ChainOptions::default()).unwrap();
        for k in [0, 2, 3] {
            prop_assert!(matches!(rec.verdicts[k], Verdict::Isometric { .. }), "map {k}: {:?}", rec.verdicts[k]);
        }
        // Phi2 and Phi never increase the norm
        for k in [1, 4] {
            let (a, b) = if k == 1 { (1, 2) } else { (0, 4) };
            prop_assert!(rec.stages[b].lower <= rec.stages[a].upper * (1.0 + 1e-9));
        }
    }

    #[test]
    fn p2_chain_is_isometric(cfg in 0..common::CONFIGS.len(), seed in any::<u64>()) {
        let ch = chain(cfg, 2.0);
        let mut rng = common::rng(seed);
        let f = DoubleCcElement::random(ch.group().clone(), ch.degree(), &mut rng);
        let rec = element_record(&ch, 0, "random", &f, &ChainOptions::default()).unwrap();
        let (s, i) = (rec.source(), rec.image());
        prop_assert!((s.upper - i.upper).abs() <= 1e-8 * s.upper);
        let all_isometric = rec.verdicts.iter().all(|v| matches!(v, Verdict::Isometric { .. }));
        prop_assert!(all_isometric, "{:?}", rec.verdicts);
    }

    #[test]
    fn verdict_is_scale_invariant(
        cfg in 0..common::CONFIGS.len(),
        p in prop_oneof![Just(1.5), Just(3.0)],
        seed in any::<u64>(),
        k in -6i32..6,
        theta in 0.0f64..1.0,
        witness in any::<bool>(),
    ) {
        let ch = chain(cfg, p);
        let f = if witness && !ch.group().is_trivial() {
            gelfand_gap_witness(&ch).unwrap()
        } else {
            DoubleCcElement::random(ch.group().clone(), ch.degree(), &mut common::rng(seed))
        };
        let c = C64::from_polar(2f64.powi(k), std::f64::consts::TAU * theta);
        prop_assert_eq!(labels(&ch, &f), labels(&ch, &f.scale(c)));
    }

    #[test]
    fn verdict_is_invariant_under_conjugate_action(
        cfg in 0..common::CONFIGS.len(),
        p in prop_oneof![Just(1.5), Just(3.0)],
        seed in any::<u64>(),
        witness in any::<bool>(),
    ) {
        let ch = chain(cfg, p);
        let n = ch.degree();
        let mut rng = common::rng(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(rng.gen_range(0..n));
        let phases = (0..n).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
        let v = PhasedPermutation::new(perm, phases).unwrap();
        let conj = Arc::new(ch.alpha().conjugated_by(&v).unwrap());
        let ch2 = DualityChain::new(conj, ch.p()).unwrap();
        let f = if witness && !ch.group().is_trivial() {
            gelfand_gap_witness(&ch).unwrap()
        } else {
            DoubleCcElement::random(ch.group().clone(), n, &mut rng)
        };
        let f2 = f.map(|_, _, a| v.conjugate(a));
        prop_assert_eq!(labels(&ch, &f), labels(&ch2, &f2));
    }

    #[test]
    fn beta_composes(cfg in 0..common::CONFIGS.len(), seed in any::<u64>()) {
        let ch = chain(cfg, 3.0);
        let mut rng = common::rng(seed);
        let pm = ch.pm_inner();
        let g = CcElement::random(pm.action().clone(), &mut rng);
        let x = LabeledOperator::square(pm.integrated_matrix(&g).unwrap(), pm.space(), ch.p()).unwrap();
        let big_n = ch.group().order();
        let s = rng.gen_range(0..big_n);
        let t = rng.gen_range(0..big_n);
        let lhs = ch.beta_action(s, &ch.beta_action(t, &x).unwrap()).unwrap();
        let rhs = ch.beta_action(ch.group().add_idx(s, t), &x).unwrap();
        prop_assert!(max_abs_diff(&lhs.matrix, &rhs.matrix) <= 1e-12);
        // beta stays inside PM(Ghat) (x) M_n
        prop_assert!(pm.span_residual(&lhs.matrix).unwrap() <= 1e-12);
    }

    #[test]
    fn equivariance_on_random_elements(cfg in 0..common::CONFIGS.len(), p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)], seed in any::<u64>()) {
        let ch = chain(cfg, p);
        let mut rng = common::rng(seed);
        let f = DoubleCcElement::random(ch.group().clone(), ch.degree(), &mut rng);
        let rep = equivariance_check(&ch, &[f]).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
        prop_assert!(rep.composite <= EQUIVARIANCE_TOL);
    }
}
