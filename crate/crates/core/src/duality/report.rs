//! Norm tables, verdicts, equivariance and rank checks for the chain.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DoubleCcElement, DualityChain};
use crate::algebra::core_compute;
use crate::error::{invalid, Result};
use crate::pnorm::{
    estimate_norm, improve_lower, max_abs, max_abs_diff, verdict_from_pairs, CMatrix, CVector, EstimateOptions,
    LabeledOperator, NormEstimate, NormPair, Verdict,
};

pub const STAGE_NAMES: [&str; 5] = ["source", "phi1", "phi2", "phi3", "phi4"];
pub const MAP_NAMES: [&str; 5] = ["phi1", "phi2", "phi3", "phi4", "phi"];

/// Element of the double crossed product isolating the norm loss of the
/// Gelfand transform: `F(gamma0, e) = N I`, `F(gamma1, e) = i N I` for the
/// trivial character `gamma0` and a character `gamma1` of order two (the first
/// nontrivial one when the order is odd). After the first map its only
/// coefficient is convolution by `delta_0 + i delta_{gamma1}` on the dual
/// group, which for an involution is a sum of copies of `[[1, i], [i, 1]]`.
pub fn gelfand_gap_witness(chain: &DualityChain) -> Result<DoubleCcElement> {
    let group = chain.group().clone();
    if group.is_trivial() {
        return invalid("the trivial group has no Gelfand gap");
    }
    let gamma1 = match group.factors().iter().position(|&m| m % 2 == 0) {
        Some(j) => {
            let mut coords = vec![0; group.factors().len()];
            coords[j] = group.factors()[j] / 2;
            group.index_of(&crate::group::GroupElement { coords })?
        }
        None => 1,
    };
    let n = chain.degree();
    let big_n = group.order() as f64;
    let id = CMatrix::identity(n, n);
    let mut y = DoubleCcElement::zero(group, n);
    y.set(0, 0, &id * C64::new(big_n, 0.0));
    y.set(0, gamma1, &id * C64::new(0.0, big_n));
    chain.phi1_coeffs_inverse(&y)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivarianceReport {
    /// `max |(Ad rho (x) alpha)_r Phi(F) - Phi(alpha_hat_hat_r F)|`.
    pub composite: f64,
    /// `max |Phi3 Phi2 Phi1 (alpha_hat_hat_r F) - ((rt (x) alpha) (x) id)_r Phi3 Phi2 Phi1 (F)|`.
    pub claim1: f64,
    /// `max |(Ad rho (x) alpha)_r Phi4(D) - Phi4(((rt (x) alpha) (x) id)_r D)|`.
    pub claim2: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub const EQUIVARIANCE_TOL: f64 = 1e-9;

pub fn equivariance_check(chain: &DualityChain, test_set: &[DoubleCcElement]) -> Result<EquivarianceReport> {
    let mut composite: f64 = 0.0;
    let mut claim1: f64 = 0.0;
    let mut claim2: f64 = 0.0;
    for f in test_set {
        let st = chain.stages(f)?;
        for r in 0..chain.group().order() {
            let moved = chain.double_dual_action(r, f)?;
            let st_moved = chain.stages(&moved)?;
            let lhs = chain.ad_rho_tensor_alpha(r, &st.after4)?;
            composite = composite.max(max_abs_diff(&lhs.matrix, &st_moved.after4.matrix));
            let rt = chain.rt_alpha_id(r, &st.after3)?;
            claim1 = claim1.max(max_abs_diff(&st_moved.after3.matrix, &rt.matrix));
            let rhs = chain.phi4(&rt)?;
            claim2 = claim2.max(max_abs_diff(&lhs.matrix, &rhs.matrix));
        }
    }
    Ok(EquivarianceReport {
        composite,
        claim1,
        claim2,
        threshold: EQUIVARIANCE_TOL,
        passed: composite <= EQUIVARIANCE_TOL && claim1 <= EQUIVARIANCE_TOL && claim2 <= EQUIVARIANCE_TOL,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankReport {
    pub map: String,
    pub rank: usize,
    pub expected: usize,
    /// Smallest singular value relative to the largest.
    pub conditioning: f64,
}

impl RankReport {
    pub fn full(&self) -> bool {
        self.rank == self.expected
    }
}

fn complex_rank(columns: &[CMatrix]) -> (usize, f64) {
    let len = columns[0].len();
    let m = DMatrix::from_fn(len, columns.len(), |r, c| columns[c].as_slice()[r]);
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = sv.iter().filter(|&&s| s > 1e-9 * smax.max(f64::MIN_POSITIVE)).count();
    (rank, if smax > 0.0 { smin / smax } else { 0.0 })
}

/// Complex rank of each map restricted to the image of the previous ones,
/// computed on the images of the coefficient basis. Full rank is `|G|^2 n^2`.
pub fn linearized_ranks(chain: &DualityChain) -> Result<Vec<RankReport>> {
    let basis = chain.coefficient_basis();
    let stages = basis.iter().map(|f| chain.stages(f)).collect::<Result<Vec<_>>>()?;
    let expected = basis.len();
    let mut out = Vec::new();
    for (k, name) in MAP_NAMES.iter().enumerate() {
        let idx = if k == 4 { 4 } else { k + 1 };
        let cols: Vec<CMatrix> = stages.iter().map(|s| s.all()[idx].matrix.clone()).collect();
        let (rank, conditioning) = complex_rank(&cols);
        out.push(RankReport {
            map: name.to_string(),
            rank,
            expected,
            conditioning,
        });
    }
    Ok(out)
}

/// Estimates for the five stages of one element, with attained witnesses
/// carried across the isometric links (`Phi1`, `Phi3`, `Phi4`).
pub fn stage_estimates(chain: &DualityChain, stages: &super::ChainStages, opts: &EstimateOptions) -> Vec<NormEstimate> {
    let p = chain.p();
    let mats = stages.all();
    let mut est: Vec<NormEstimate> = mats.iter().map(|m| estimate_norm(&m.matrix, p, opts)).collect();
    let col = |v: &CVector| CMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let vec_of = |m: CMatrix| CVector::from_column_slice(m.as_slice());
    let big_n = chain.group().order();
    let n = chain.degree();
    for _ in 0..2 {
        // Phi1: x -> W x
        let w = chain.w();
        let fwd = vec_of(w.apply_left(&col(&est[0].witness)));
        let back = vec_of(w.inverse().apply_left(&col(&est[1].witness)));
        improve_lower(&mut est[1], &mats[1].matrix, p, &[fwd]);
        improve_lower(&mut est[0], &mats[0].matrix, p, &[back]);
        // Phi3: x -> Z3 x
        let z = chain.z3();
        let fwd = vec_of(z.apply_left(&col(&est[2].witness)));
        let back = vec_of(z.inverse().apply_left(&col(&est[3].witness)));
        improve_lower(&mut est[3], &mats[3].matrix, p, &[fwd]);
        improve_lower(&mut est[2], &mats[2].matrix, p, &[back]);
        // Phi4: slices of V x, and V^{-1}(xi (x) delta_0)
        let v = chain.v();
        let vx = vec_of(v.apply_left(&col(&est[3].witness)));
        let slices: Vec<CVector> = (0..big_n)
            .map(|mid| {
                CVector::from_fn(big_n * n, |k, _| {
                    let (r, i) = (k / n, k % n);
                    vx[(r * big_n + mid) * n + i]
                })
            })
            .collect();
        let xi = &est[4].witness;
        let mut lifted = CVector::zeros(big_n * big_n * n);
        for r in 0..big_n {
            for i in 0..n {
                lifted[(r * big_n) * n + i] = xi[r * n + i];
            }
        }
        let back = vec_of(v.inverse().apply_left(&col(&lifted)));
        improve_lower(&mut est[4], &mats[4].matrix, p, &slices);
        improve_lower(&mut est[3], &mats[3].matrix, p, &[back]);
    }
    est
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementRecord {
    pub id: usize,
    pub label: String,
    pub p: f64,
    /// Indexed like [`STAGE_NAMES`].
    pub stages: Vec<NormEstimate>,
    /// Indexed like [`MAP_NAMES`].
    pub verdicts: Vec<Verdict>,
}

impl ElementRecord {
    pub fn source(&self) -> &NormEstimate {
        &self.stages[0]
    }

    pub fn image(&self) -> &NormEstimate {
        &self.stages[4]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapRecord {
    pub name: String,
    /// `max |Phi(x y) - Phi(x) Phi(y)|` relative to the operand sizes.
    pub hom_residual: f64,
    pub rank: Option<RankReport>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoreDimensions {
    pub core_a: usize,
    pub core_double: usize,
    pub core_target: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainReport {
    pub group: String,
    pub n: usize,
    pub action: String,
    pub p: f64,
    pub maps: Vec<MapRecord>,
    pub elements: Vec<ElementRecord>,
    pub gap_witness: Option<ElementRecord>,
    pub equivariance: EquivarianceReport,
    pub representation_residual: f64,
    pub core: Option<CoreDimensions>,
}

#[derive(Clone, Debug)]
pub struct ChainOptions {
    pub estimate: EstimateOptions,
    /// Relative margin for verdicts.
    pub margin: f64,
    pub tests: usize,
    pub seed: u64,
    pub with_rank: bool,
    pub with_core: bool,
    pub equivariance_samples: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            estimate: EstimateOptions::fast(),
            margin: 1e-8,
            tests: 8,
            seed: 7,
            with_rank: true,
            with_core: false,
            equivariance_samples: 2,
        }
    }
}

pub fn element_record(
    chain: &DualityChain,
    id: usize,
    label: &str,
    f: &DoubleCcElement,
    opts: &ChainOptions,
) -> Result<ElementRecord> {
    let stages = chain.stages(f)?;
    let est = stage_estimates(chain, &stages, &opts.estimate);
    let links = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)];
    let verdicts = links
        .iter()
        .map(|&(a, b)| {
            verdict_from_pairs(
                &[NormPair {
                    source: est[a].clone(),
                    image: est[b].clone(),
                }],
                opts.margin,
            )
        })
        .collect();
    Ok(ElementRecord {
        id,
        label: label.to_string(),
        p: chain.p().p(),
        stages: est,
        verdicts,
    })
}

/// Combine per-element verdicts for one map into a verdict over the test set.
pub fn combine_verdicts(records: &[&ElementRecord], map: usize, margin: f64) -> Verdict {
    let links = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)];
    let (a, b) = links[map];
    let pairs: Vec<NormPair> = records
        .iter()
        .map(|r| NormPair {
            source: r.stages[a].clone(),
            image: r.stages[b].clone(),
        })
        .collect();
    verdict_from_pairs(&pairs, margin)
}

fn rel_residual(lhs: &CMatrix, rhs: &CMatrix) -> f64 {
    max_abs_diff(lhs, rhs) / max_abs(rhs).max(1.0)
}

fn stage_hom_residuals(chain: &DualityChain, f: &DoubleCcElement, h: &DoubleCcElement) -> Result<[f64; 5]> {
    let fh = chain.double_convolve(f, h)?;
    let sf = chain.stages(f)?;
    let sh = chain.stages(h)?;
    let sfh = chain.stages(&fh)?;
    let (a, b, ab) = (sf.all(), sh.all(), sfh.all());
    Ok(std::array::from_fn(|k| rel_residual(&ab[k].matrix, &(&a[k].matrix * &b[k].matrix))))
}

pub fn core_dimensions(chain: &DualityChain) -> Result<CoreDimensions> {
    let p = chain.p();
    let n = chain.degree();
    let units = |d: usize| -> Vec<LabeledOperator> {
        let mut v = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let mut m = CMatrix::zeros(d, d);
                m[(i, j)] = C64::new(1.0, 0.0);
                v.push(LabeledOperator::plain(m, p).expect("square"));
            }
        }
        v
    };
    let core_a = core_compute(&units(n))?.len();
    let double_basis = chain
        .coefficient_basis()
        .iter()
        .map(|f| chain.rep_double(f))
        .collect::<Result<Vec<_>>>()?;
    let core_double = core_compute(&double_basis)?.len();
    let core_target = core_compute(&units(chain.group().order() * n))?.len();
    Ok(CoreDimensions {
        core_a,
        core_double,
        core_target,
    })
}

/// Run the chain on seeded random elements (plus the gap witness for a
/// nontrivial group) and collect norms, verdicts, residuals and ranks.
pub fn chain_report(chain: &DualityChain, opts: &ChainOptions) -> Result<ChainReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let group = chain.group().clone();
    let n = chain.degree();
    let tests: Vec<DoubleCcElement> = (0..opts.tests)
        .map(|_| DoubleCcElement::random(group.clone(), n, &mut rng))
        .collect();
    let mut elements = Vec::with_capacity(tests.len());
    for (id, f) in tests.iter().enumerate() {
        elements.push(element_record(chain, id, "random", f, opts)?);
    }
    let gap_witness = if group.is_trivial() {
        None
    } else {
        let f = gelfand_gap_witness(chain)?;
        Some(element_record(chain, tests.len(), "gelfand-gap", &f, opts)?)
    };

    let mut hom = [0.0f64; 5];
    for pair in tests.chunks(2) {
        if let [f, h] = pair {
            let r = stage_hom_residuals(chain, f, h)?;
            for k in 0..5 {
                hom[k] = hom[k].max(r[k]);
            }
        }
    }
    if tests.len() < 2 {
        let f = DoubleCcElement::random(group.clone(), n, &mut rng);
        let h = DoubleCcElement::random(group.clone(), n, &mut rng);
        hom = stage_hom_residuals(chain, &f, &h)?;
    }

    let ranks = if opts.with_rank {
        Some(linearized_ranks(chain)?)
    } else {
        None
    };
    let mut all: Vec<&ElementRecord> = elements.iter().collect();
    if let Some(g) = &gap_witness {
        all.push(g);
    }
    let maps = MAP_NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| MapRecord {
            name: name.to_string(),
            hom_residual: if k == 4 { hom[4] } else { hom[k + 1] },
            rank: ranks.as_ref().map(|r| r[k].clone()),
            verdict: combine_verdicts(&all, k, opts.margin),
        })
        .collect();

    let eq_set: Vec<DoubleCcElement> = tests.iter().take(opts.equivariance_samples).cloned().collect();
    let equivariance = equivariance_check(chain, &eq_set)?;
    let core = if opts.with_core {
        Some(core_dimensions(chain)?)
    } else {
        None
    };
    Ok(ChainReport {
        group: group.to_string(),
        n,
        action: chain.alpha().to_string(),
        p: chain.p().p(),
        maps,
        elements,
        gap_witness,
        equivariance,
        representation_residual: hom[0],
        core,
    })
}
