#![allow(dead_code)]

use std::sync::Arc;

use lpdl_core::algebra::GroupAction;
use lpdl_core::group::FiniteAbelianGroup;
use lpdl_core::pnorm::{CMatrix, PExponent};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn p_of(x: f64) -> PExponent {
    PExponent::new(x).unwrap()
}

pub fn action(group: &str, n: usize, literal: &str) -> Arc<GroupAction> {
    let g: FiniteAbelianGroup = group.parse().unwrap();
    Arc::new(GroupAction::parse(literal, &g, n).unwrap())
}

/// Configurations used throughout: (group, n, action literal).
pub const CONFIGS: [(&str, usize, &str); 8] = [
    ("Z2", 1, "trivial"),
    ("Z2", 2, "perm:(0 1)"),
    ("Z3", 1, "trivial"),
    ("Z3", 2, "phased:()[0,1/3]"),
    ("Z4", 1, "trivial"),
    ("Z4", 2, "phased:(0 1)[1/8,0]"),
    ("Z2xZ2", 1, "trivial"),
    ("Z2xZ2", 2, "perm:(0 1);phased:()[0,1/2]"),
];
