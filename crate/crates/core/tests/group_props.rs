mod common;

use lpdl_core::group::{fourier_transform, inverse_fourier_transform, FiniteAbelianGroup};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn group_strategy() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop::collection::vec(1usize..=5, 1..=3)
        .prop_filter("keep groups small", |f| f.iter().product::<usize>() <= 40)
        .prop_map(|f| FiniteAbelianGroup::new(f).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn character_sums_detect_identity(g in group_strategy()) {
        let n = g.order();
        for s in 0..n {
            let sum: C64 = (0..n).map(|gamma| g.pairing_idx(gamma, s)).sum();
            let want = if s == 0 { n as f64 } else { 0.0 };
            prop_assert!((sum - C64::new(want, 0.0)).norm() <= 1e-12, "s={s} sum={sum}");
        }
    }

    #[test]
    fn character_table_is_unitary_up_to_order(g in group_strategy()) {
        let t = g.character_table();
        let n = g.order() as f64;
        let prod = &t * t.adjoint();
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                let want = if i == j { n } else { 0.0 };
                prop_assert!((prod[(i, j)] - C64::new(want, 0.0)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn fourier_round_trip(g in group_strategy(), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = common::random_matrix(&mut rng, g.order(), 1);
        let f: Vec<C64> = f.iter().copied().collect();
        let back = inverse_fourier_transform(&g, &fourier_transform(&g, &f).unwrap()).unwrap();
        let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn enumeration_is_stable(g in group_strategy()) {
        let again = FiniteAbelianGroup::new(g.factors().to_vec()).unwrap();
        prop_assert_eq!(g.elements(), again.elements());
        for (k, s) in g.elements().iter().enumerate() {
            prop_assert_eq!(g.index_of(s).unwrap(), k);
        }
    }
}
