//! Combined norm estimates tagged with their bound methods, amplified norms and isometry
//! verdicts.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bounds::{grid_upper, riesz_thorin, GRID_MAX_DIM};
use super::labeled::{CMatrix, LabeledOperator, PExponent};
use super::power::{power_lower, CVector, PowerOptions};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    PowerIteration,
    GridRefine,
    RieszThorin,
    ExactP2,
    ExactDiagonal,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundMethod::PowerIteration => "power-iteration",
            BoundMethod::GridRefine => "grid-refine",
            BoundMethod::RieszThorin => "riesz-thorin",
            BoundMethod::ExactP2 => "exact-p2",
            BoundMethod::ExactDiagonal => "exact-diagonal",
        };
        f.write_str(s)
    }
}

/// Bracket `lower <= ||A||_{p->p} <= upper`.
///
/// `lower` is attained: `||A w||_p / ||w||_p >= lower` for the stored witness
/// `w`. An estimate without an upper bound carries `upper = +inf`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    #[serde(with = "witness_serde")]
    pub witness: CVector,
    pub lower_method: BoundMethod,
    pub upper: f64,
    pub upper_method: Option<BoundMethod>,
    /// `|power lower - largest singular value|`, filled in at `p = 2`.
    pub p2_crosscheck: Option<f64>,
}

mod witness_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = w.iter().map(|z| [z.re, z.im]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(DVector::from_iterator(v.len(), v.into_iter().map(|[re, im]| C64::new(re, im))))
    }
}

impl NormEstimate {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    /// Attained ratio of the witness, recomputed.
    pub fn witness_ratio(&self, a: &CMatrix, p: PExponent) -> f64 {
        ratio_of(a, &self.witness, p)
    }

    /// Combine two brackets for the same matrix.
    pub fn merge(mut self, other: NormEstimate) -> NormEstimate {
        if other.lower > self.lower {
            self.lower = other.lower;
            self.witness = other.witness;
            self.lower_method = other.lower_method;
        }
        if other.upper < self.upper {
            self.upper = other.upper;
            self.upper_method = other.upper_method;
        }
        self.p2_crosscheck = self.p2_crosscheck.or(other.p2_crosscheck);
        self
    }
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub power: PowerOptions,
    /// Refinement depth for the grid bound; `None` skips it.
    pub grid_depth: Option<usize>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            power: PowerOptions::default(),
            grid_depth: Some(24),
        }
    }
}

impl EstimateOptions {
    pub fn fast() -> Self {
        Self {
            power: PowerOptions {
                restarts: 6,
                max_iter: 500,
                ..PowerOptions::default()
            },
            grid_depth: None,
        }
    }
}

pub fn pnorm_lower_power(a: &LabeledOperator, restarts: usize, tol: f64) -> NormEstimate {
    let opts = PowerOptions {
        restarts,
        tol,
        ..PowerOptions::default()
    };
    lower_estimate(&a.matrix, a.p, &opts)
}

fn lower_estimate(a: &CMatrix, p: PExponent, opts: &PowerOptions) -> NormEstimate {
    let (lower, witness) = power_lower(a, p, opts);
    NormEstimate {
        lower,
        witness,
        lower_method: BoundMethod::PowerIteration,
        upper: f64::INFINITY,
        upper_method: None,
        p2_crosscheck: None,
    }
}

pub fn pnorm_upper_riesz_thorin(a: &LabeledOperator) -> f64 {
    riesz_thorin(&a.matrix, a.p)
}

pub fn pnorm_upper_grid(a: &LabeledOperator, depth: usize) -> Result<f64> {
    Ok(grid_upper(&a.matrix, a.p, depth)?.upper)
}

fn ratio_of(a: &CMatrix, x: &CVector, p: PExponent) -> f64 {
    let nx = super::vector_pnorm(x.as_slice(), p);
    if nx == 0.0 {
        return 0.0;
    }
    super::vector_pnorm((a * x).as_slice(), p) / nx
}

/// Best attained ratio over candidate witnesses, merged into `est`.
pub fn improve_lower(est: &mut NormEstimate, a: &CMatrix, p: PExponent, candidates: &[CVector]) {
    for x in candidates {
        if x.len() != a.ncols() {
            continue;
        }
        let r = ratio_of(a, x, p);
        if r > est.lower {
            est.lower = r;
            est.witness = x.clone();
        }
    }
    if est.upper < est.lower {
        est.upper = est.lower;
    }
}

pub fn largest_singular_value(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

fn diagonal_max(a: &CMatrix) -> Option<f64> {
    if !a.is_square() {
        return None;
    }
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] != C64::new(0.0, 0.0) {
                return None;
            }
        }
    }
    Some((0..n).map(|i| a[(i, i)].norm()).fold(0.0, f64::max))
}

/// Best available bracket: power lower bound, then the tightest of the exact
/// diagonal value, the `p = 2` singular value, the grid bound (dimension at
/// most 4) and Riesz-Thorin.
pub fn estimate_norm(a: &CMatrix, p: PExponent, opts: &EstimateOptions) -> NormEstimate {
    let mut est = lower_estimate(a, p, &opts.power);
    let rt = riesz_thorin(a, p);
    est.upper = rt;
    est.upper_method = Some(BoundMethod::RieszThorin);
    if let Some(d) = diagonal_max(a) {
        if d <= est.upper {
            est.upper = d;
            est.upper_method = Some(BoundMethod::ExactDiagonal);
        }
        if d > est.lower {
            let i = (0..a.nrows()).max_by(|&i, &j| a[(i, i)].norm().total_cmp(&a[(j, j)].norm()));
            let mut w = CVector::zeros(a.ncols());
            if let Some(i) = i {
                w[i] = C64::new(1.0, 0.0);
            }
            est.lower = d;
            est.witness = w;
            est.lower_method = BoundMethod::ExactDiagonal;
        }
    }
    if p.is_two() && !a.is_empty() {
        let svd = a.clone().svd(false, true);
        let (k, s) = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (k, s)| if s > acc.1 { (k, s) } else { acc });
        est.p2_crosscheck = Some((s - est.lower).abs());
        if s < est.upper {
            est.upper = s;
            est.upper_method = Some(BoundMethod::ExactP2);
        }
        // the top right singular vector attains the norm
        let v = svd.v_t.expect("requested V^T").row(k).adjoint();
        let r = ratio_of(a, &v, p);
        if r > est.lower {
            est.lower = r;
            est.witness = v;
            est.lower_method = BoundMethod::ExactP2;
        }
    }
    if let Some(depth) = opts.grid_depth {
        if a.nrows().max(a.ncols()) <= GRID_MAX_DIM && est.upper > est.lower {
            if let Ok(g) = grid_upper(a, p, depth) {
                if g.upper < est.upper {
                    est.upper = g.upper;
                    est.upper_method = Some(BoundMethod::GridRefine);
                }
                if g.lower > est.lower {
                    est.lower = g.lower;
                    est.witness = g.witness;
                    est.lower_method = BoundMethod::GridRefine;
                }
            }
        }
    }
    // round-off can leave an exact upper a hair below the attained value
    if est.upper < est.lower {
        est.upper = est.lower;
    }
    est
}

pub fn estimate_labeled(a: &LabeledOperator, opts: &EstimateOptions) -> NormEstimate {
    estimate_norm(&a.matrix, a.p, opts)
}

type MatrixFn<'a> = Box<dyn Fn(&CMatrix) -> Result<CMatrix> + Send + Sync + 'a>;

/// A linear map between matrix spaces, normed at a common exponent.
pub struct LinearMap<'a> {
    pub in_shape: (usize, usize),
    pub out_shape: (usize, usize),
    f: MatrixFn<'a>,
}

impl<'a> LinearMap<'a> {
    pub fn new(
        in_shape: (usize, usize),
        out_shape: (usize, usize),
        f: impl Fn(&CMatrix) -> Result<CMatrix> + Send + Sync + 'a,
    ) -> Self {
        Self {
            in_shape,
            out_shape,
            f: Box::new(f),
        }
    }

    /// The map determined by `basis[i] -> images[i]`, extended linearly.
    /// Inputs outside the span of `basis` are rejected.
    pub fn from_basis(basis: Vec<CMatrix>, images: Vec<CMatrix>) -> Result<LinearMap<'static>> {
        if basis.is_empty() || basis.len() != images.len() {
            return invalid("basis and images must be nonempty and of equal length");
        }
        let in_shape = basis[0].shape();
        let out_shape = images[0].shape();
        if basis.iter().any(|b| b.shape() != in_shape) || images.iter().any(|m| m.shape() != out_shape) {
            return invalid("basis elements (and images) must share a shape");
        }
        let len = in_shape.0 * in_shape.1;
        let coords = CMatrix::from_fn(len, basis.len(), |r, c| basis[c].as_slice()[r]);
        let svd = coords.clone().svd(true, true);
        let pinv = svd
            .pseudo_inverse(1e-10)
            .map_err(|e| crate::error::Error::InvalidArgument(e.to_string()))?;
        Ok(LinearMap::new(in_shape, out_shape, move |x: &CMatrix| {
            if x.shape() != in_shape {
                return invalid(format!("expected {:?} input, got {:?}", in_shape, x.shape()));
            }
            let v = DVector::from_column_slice(x.as_slice());
            let c = &pinv * &v;
            let resid = (&coords * &c - &v).camax();
            if resid > 1e-8 * (1.0 + v.camax()) {
                return invalid("input is not in the span of the basis");
            }
            let mut out = CMatrix::zeros(out_shape.0, out_shape.1);
            for (ci, img) in c.iter().zip(images.iter()) {
                out += img * *ci;
            }
            Ok(out)
        }))
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != self.in_shape {
            return invalid(format!("expected {:?} input, got {:?}", self.in_shape, x.shape()));
        }
        (self.f)(x)
    }

    /// `id_{M_k} (x) phi` applied to a `k x k` block matrix.
    pub fn amplify(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        let (ir, ic) = self.in_shape;
        let (or, oc) = self.out_shape;
        if x.shape() != (k * ir, k * ic) {
            return invalid("amplified input has the wrong block shape");
        }
        let mut out = CMatrix::zeros(k * or, k * oc);
        for bi in 0..k {
            for bj in 0..k {
                let blk = x.view((bi * ir, bj * ic), (ir, ic)).into_owned();
                let img = self.apply(&blk)?;
                out.view_mut((bi * or, bj * oc), (or, oc)).copy_from(&img);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PcbLevel {
    pub k: usize,
    /// Largest `lower(phi_k X) / lower(X)` over the samples: a point estimate
    /// of `||phi_k||`, not a bound.
    pub estimate: f64,
    /// Largest `lower(phi_k X) / upper(X)`: a certified lower bound on `||phi_k||`.
    pub certified_lower: f64,
    pub samples: usize,
}

/// Amplified norms `||phi_k||` for `k <= K`. The supremum over all `k` is
/// only approximated from below by the truncation at `K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PcbEstimate {
    pub levels: Vec<PcbLevel>,
    pub estimate: f64,
    pub certified_lower: f64,
    pub truncated_at: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct PcbOptions {
    pub samples_per_level: usize,
    pub seed: u64,
    pub estimate: EstimateOptions,
}

impl Default for PcbOptions {
    fn default() -> Self {
        Self {
            samples_per_level: 8,
            seed: 0xc0b5,
            estimate: EstimateOptions::fast(),
        }
    }
}

/// Samples `X` in `M_k(dom)` are the amplified `test_inputs` (`I_k (x) x`
/// and `x` in a corner block) followed by seeded random block matrices.
pub fn pcb_norm_estimate(
    phi: &LinearMap<'_>,
    test_inputs: &[CMatrix],
    k_max: usize,
    p: PExponent,
    opts: &PcbOptions,
) -> Result<PcbEstimate> {
    if k_max == 0 {
        return invalid("K must be at least 1");
    }
    let (ir, ic) = phi.in_shape;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut levels = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut samples: Vec<CMatrix> = Vec::new();
        for x in test_inputs {
            let mut corner = CMatrix::zeros(k * ir, k * ic);
            corner.view_mut((0, 0), (ir, ic)).copy_from(x);
            samples.push(corner);
            if k > 1 {
                samples.push(x.kronecker(&CMatrix::identity(k, k)).map(|z| z));
                let mut diag = CMatrix::zeros(k * ir, k * ic);
                for b in 0..k {
                    diag.view_mut((b * ir, b * ic), (ir, ic)).copy_from(x);
                }
                samples.push(diag);
            }
        }
        for _ in 0..opts.samples_per_level {
            samples.push(CMatrix::from_fn(k * ir, k * ic, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }));
        }
        let mut level = PcbLevel {
            k,
            estimate: 0.0,
            certified_lower: 0.0,
            samples: 0,
        };
        for x in samples.iter() {
            if x.shape() != (k * ir, k * ic) {
                continue;
            }
            let src = estimate_norm(x, p, &opts.estimate);
            if src.lower == 0.0 {
                continue;
            }
            let img = phi.amplify(k, x)?;
            let dst = estimate_norm(&img, p, &opts.estimate);
            level.samples += 1;
            level.estimate = level.estimate.max(dst.lower / src.lower);
            level.certified_lower = level.certified_lower.max(dst.lower / src.upper);
        }
        levels.push(level);
    }
    let estimate = levels.iter().map(|l| l.estimate).fold(0.0, f64::max);
    let certified_lower = levels.iter().map(|l| l.certified_lower).fold(0.0, f64::max);
    Ok(PcbEstimate {
        levels,
        estimate,
        certified_lower,
        truncated_at: k_max,
        truncated: true,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Isometric {
        max_lower_deviation: f64,
        max_upper_deviation: f64,
    },
    StrictlyContractiveWithWitness {
        index: usize,
        source_lower: f64,
        image_upper: f64,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Isometric { .. } => "isometric",
            Verdict::StrictlyContractiveWithWitness { .. } => "strictly-contractive-with-witness",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Per-element norm data behind a verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormPair {
    pub source: NormEstimate,
    pub image: NormEstimate,
}

/// Compare `||x||` with `||Phi x||` over a test set. The margin is relative
/// to `||x||`, so the verdict does not change when the test set is rescaled.
pub fn isometry_verdict(
    phi: &dyn Fn(&CMatrix) -> Result<CMatrix>,
    test_set: &[CMatrix],
    p: PExponent,
    margin: f64,
    opts: &EstimateOptions,
) -> Result<(Verdict, Vec<NormPair>)> {
    if test_set.is_empty() {
        return invalid("isometry verdict needs a nonempty test set");
    }
    let mut pairs = Vec::with_capacity(test_set.len());
    for x in test_set {
        let source = estimate_norm(x, p, opts);
        let image = estimate_norm(&phi(x)?, p, opts);
        pairs.push(NormPair { source, image });
    }
    Ok((verdict_from_pairs(&pairs, margin), pairs))
}

pub fn verdict_from_pairs(pairs: &[NormPair], margin: f64) -> Verdict {
    for (index, pr) in pairs.iter().enumerate() {
        let scale = pr.source.lower;
        if scale > 0.0 && pr.image.upper < pr.source.lower - margin * scale {
            return Verdict::StrictlyContractiveWithWitness {
                index,
                source_lower: pr.source.lower,
                image_upper: pr.image.upper,
            };
        }
    }
    let mut dl: f64 = 0.0;
    let mut du: f64 = 0.0;
    let mut ok = true;
    for pr in pairs {
        let scale = pr.source.lower.max(f64::MIN_POSITIVE);
        let l = (pr.image.lower - pr.source.lower).abs() / scale;
        let u = (pr.image.upper - pr.source.upper).abs() / scale;
        dl = dl.max(l);
        du = du.max(u);
        ok &= l <= margin && u <= margin;
    }
    if ok {
        Verdict::Isometric {
            max_lower_deviation: dl,
            max_upper_deviation: du,
        }
    } else {
        Verdict::Inconclusive {
            reason: format!(
                "relative deviations lower={dl:.3e}, upper={du:.3e} exceed margin {margin:.1e} without a certified contraction"
            ),
        }
    }
}
