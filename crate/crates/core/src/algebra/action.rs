//! Group actions on `M_n` implemented by phased permutations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::group::{root_of_unity, FiniteAbelianGroup};
use crate::pnorm::CMatrix;

const SCALAR_TOL: f64 = 1e-12;

/// `u e_j = phase[j] e_{perm[j]}` with `|phase[j]| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasedPermutation {
    perm: Vec<usize>,
    phase: Vec<C64>,
}

impl PhasedPermutation {
    pub fn new(perm: Vec<usize>, phase: Vec<C64>) -> Result<Self> {
        let n = perm.len();
        if phase.len() != n {
            return invalid(format!("{} phases for a permutation of degree {n}", phase.len()));
        }
        let mut seen = vec![false; n];
        for &j in &perm {
            if j >= n || seen[j] {
                return invalid(format!("{perm:?} is not a permutation of 0..{n}"));
            }
            seen[j] = true;
        }
        if let Some(z) = phase.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return invalid(format!("phase {z} does not have modulus one"));
        }
        Ok(Self { perm, phase })
    }

    pub fn permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        Self::new(perm, vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(phase: Vec<C64>) -> Result<Self> {
        Self::new((0..phase.len()).collect(), phase)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            phase: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn degree(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[C64] {
        &self.phase
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        assert_eq!(self.degree(), rhs.degree(), "degree mismatch");
        let perm = rhs.perm.iter().map(|&k| self.perm[k]).collect();
        let phase = rhs
            .perm
            .iter()
            .zip(&rhs.phase)
            .map(|(&k, &ph)| ph * self.phase[k])
            .collect();
        Self { perm, phase }
    }

    pub fn inverse(&self) -> Self {
        let n = self.degree();
        let mut perm = vec![0; n];
        let mut phase = vec![C64::new(1.0, 0.0); n];
        for j in 0..n {
            perm[self.perm[j]] = j;
            phase[self.perm[j]] = self.phase[j].conj();
        }
        Self { perm, phase }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.degree()), |acc, _| acc.compose(self))
    }

    /// `self (x) rhs` with the left factor slowest.
    pub fn kron(&self, rhs: &Self) -> Self {
        let m = rhs.degree();
        let mut perm = Vec::with_capacity(self.degree() * m);
        let mut phase = Vec::with_capacity(self.degree() * m);
        for (&pi, &phi) in self.perm.iter().zip(&self.phase) {
            for (&pj, &phj) in rhs.perm.iter().zip(&rhs.phase) {
                perm.push(pi * m + pj);
                phase.push(phi * phj);
            }
        }
        Self { perm, phase }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.degree();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            m[(self.perm[j], j)] = self.phase[j];
        }
        m
    }

    /// `u a u^{-1}`.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        let n = self.degree();
        assert_eq!(a.shape(), (n, n), "conjugating a matrix of the wrong size");
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            let cj = self.phase[j].conj();
            for i in 0..n {
                out[(self.perm[i], self.perm[j])] = self.phase[i] * a[(i, j)] * cj;
            }
        }
        out
    }

    /// `u x` for a column vector or a stack of columns.
    pub fn apply_left(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for j in 0..self.degree() {
            let row = x.row(j) * self.phase[j];
            out.row_mut(self.perm[j]).copy_from(&row);
        }
        out
    }

    /// `Some(c)` when `self = c I`.
    pub fn scalar(&self) -> Option<C64> {
        let c = *self.phase.first()?;
        let ok = self.perm.iter().enumerate().all(|(i, &j)| i == j)
            && self.phase.iter().all(|z| (z - c).norm() <= SCALAR_TOL);
        ok.then_some(c)
    }

    pub fn is_identity(&self) -> bool {
        self.scalar().is_some_and(|c| (c - C64::new(1.0, 0.0)).norm() <= SCALAR_TOL)
    }
}

/// `alpha_t = Ad u_t` on `M_n` for `t` in a finite abelian group.
///
/// Built from one generator per cyclic factor, `u_t = g_1^{t_1} ... g_k^{t_k}`,
/// or from an explicit list of implementers. Only `Ad u_t` has to be a group
/// homomorphism, so the `u_t` may multiply up to scalars.
#[derive(Clone, Debug)]
pub struct GroupAction {
    group: FiniteAbelianGroup,
    degree: usize,
    implementers: Vec<PhasedPermutation>,
    literal: Option<String>,
}

impl PartialEq for GroupAction {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.degree == other.degree && self.implementers == other.implementers
    }
}

impl GroupAction {
    pub fn trivial(group: FiniteAbelianGroup, degree: usize) -> Self {
        let implementers = vec![PhasedPermutation::identity(degree); group.order()];
        Self {
            group,
            degree,
            implementers,
            literal: Some("trivial".into()),
        }
    }

    pub fn from_generators(group: FiniteAbelianGroup, generators: Vec<PhasedPermutation>) -> Result<Self> {
        let factors = group.factors().to_vec();
        if generators.len() != factors.len() {
            return invalid(format!(
                "{} generators given for a group with {} cyclic factors",
                generators.len(),
                factors.len()
            ));
        }
        let degree = generators.first().map_or(1, |g| g.degree());
        if generators.iter().any(|g| g.degree() != degree) {
            return invalid("generators act on spaces of different dimension");
        }
        for (g, &n) in generators.iter().zip(&factors) {
            if g.pow(n).scalar().is_none() {
                return invalid(format!("generator raised to the power {n} is not a scalar"));
            }
        }
        for (i, gi) in generators.iter().enumerate() {
            for gj in &generators[i + 1..] {
                let comm = gi.compose(gj).compose(&gi.inverse()).compose(&gj.inverse());
                if comm.scalar().is_none() {
                    return invalid("generators of different factors must commute up to a scalar");
                }
            }
        }
        let implementers = group
            .elements()
            .iter()
            .map(|t| {
                t.coords
                    .iter()
                    .zip(&generators)
                    .fold(PhasedPermutation::identity(degree), |acc, (&k, g)| acc.compose(&g.pow(k)))
            })
            .collect();
        Ok(Self {
            group,
            degree,
            implementers,
            literal: None,
        })
    }

    /// Implementers listed in element enumeration order.
    pub fn from_implementers(group: FiniteAbelianGroup, implementers: Vec<PhasedPermutation>) -> Result<Self> {
        let n = group.order();
        if implementers.len() != n {
            return invalid(format!("{} implementers for a group of order {n}", implementers.len()));
        }
        let degree = implementers[0].degree();
        if implementers.iter().any(|u| u.degree() != degree) {
            return invalid("implementers act on spaces of different dimension");
        }
        if implementers[0].scalar().is_none() {
            return invalid("the identity must be implemented by a scalar");
        }
        for s in 0..n {
            for t in 0..n {
                let st = group.add_idx(s, t);
                let defect = implementers[st]
                    .inverse()
                    .compose(&implementers[s])
                    .compose(&implementers[t]);
                if defect.scalar().is_none() {
                    return invalid("Ad u is not multiplicative on the group");
                }
            }
        }
        Ok(Self {
            group,
            degree,
            implementers,
            literal: None,
        })
    }

    /// Parse an action literal: `trivial`, or one generator per cyclic factor
    /// separated by `;`, each `id`, `perm:(0 1)(2 3)` or
    /// `phased:(0 1)[0,1/4]` (phases in turns, one per basis vector).
    pub fn parse(literal: &str, group: &FiniteAbelianGroup, degree: usize) -> Result<Self> {
        let lit = literal.trim();
        if lit == "trivial" {
            return Ok(Self::trivial(group.clone(), degree));
        }
        let gens = lit
            .split(';')
            .map(|g| parse_generator(g.trim(), degree))
            .collect::<Result<Vec<_>>>()?;
        let mut action = Self::from_generators(group.clone(), gens)?;
        action.literal = Some(lit.to_string());
        Ok(action)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn literal(&self) -> Option<&str> {
        self.literal.as_deref()
    }

    pub fn implementer(&self, t: usize) -> &PhasedPermutation {
        &self.implementers[t]
    }

    pub fn implementers(&self) -> &[PhasedPermutation] {
        &self.implementers
    }

    /// `alpha_t(a)` for the element with index `t`.
    pub fn apply(&self, t: usize, a: &CMatrix) -> CMatrix {
        self.implementers[t].conjugate(a)
    }

    pub fn is_trivial(&self) -> bool {
        self.implementers.iter().all(|u| u.scalar().is_some())
    }

    /// `Ad v o alpha o Ad v^{-1}`, implemented by `v u_t v^{-1}`.
    pub fn conjugated_by(&self, v: &PhasedPermutation) -> Result<GroupAction> {
        if v.degree() != self.degree {
            return invalid("conjugating isometry has the wrong degree");
        }
        let vi = v.inverse();
        let implementers = self.implementers.iter().map(|u| v.compose(u).compose(&vi)).collect();
        Ok(GroupAction {
            group: self.group.clone(),
            degree: self.degree,
            implementers,
            literal: None,
        })
    }

    /// `Ad(u_t (x) v_t)` for two actions of the same group.
    pub fn tensor(&self, other: &GroupAction) -> Result<GroupAction> {
        if self.group != other.group {
            return invalid("tensor product of actions of different groups");
        }
        let implementers = self
            .implementers
            .iter()
            .zip(&other.implementers)
            .map(|(u, v)| u.kron(v))
            .collect();
        Ok(GroupAction {
            group: self.group.clone(),
            degree: self.degree * other.degree,
            implementers,
            literal: None,
        })
    }
}

impl fmt::Display for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.literal {
            Some(l) => f.write_str(l),
            None => write!(f, "<derived action of {} on M_{}>", self.group, self.degree),
        }
    }
}

fn parse_err(input: &str, hint: &str) -> Error {
    Error::Parse {
        what: "action generator",
        input: input.to_string(),
        hint: hint.to_string(),
    }
}

fn parse_cycles(s: &str, degree: usize) -> Result<Vec<usize>> {
    let mut perm: Vec<usize> = (0..degree).collect();
    let mut seen = vec![false; degree];
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| parse_err(s, "cycles look like (0 1 2)(3 4)"))?;
        let cycle = body
            .0
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(s, "cycle entries are 0-based indices")))
            .collect::<Result<Vec<_>>>()?;
        for (k, &i) in cycle.iter().enumerate() {
            if i >= degree || seen[i] {
                return Err(parse_err(s, &format!("indices must be distinct and below {degree}")));
            }
            seen[i] = true;
            perm[i] = cycle[(k + 1) % cycle.len()];
        }
        rest = body.1.trim_start();
    }
    Ok(perm)
}

fn parse_turn(s: &str) -> Result<C64> {
    let bad = || parse_err(s, "phases are fractions of a full turn such as 1/4 or -1/3");
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: i64 = num.parse().map_err(|_| bad())?;
    let den: i64 = den.parse().map_err(|_| bad())?;
    if den <= 0 {
        return Err(bad());
    }
    Ok(root_of_unity(num.rem_euclid(den) as usize, den as usize))
}

fn parse_generator(s: &str, degree: usize) -> Result<PhasedPermutation> {
    if s == "id" {
        return Ok(PhasedPermutation::identity(degree));
    }
    if let Some(c) = s.strip_prefix("perm:") {
        return PhasedPermutation::permutation(parse_cycles(c, degree)?);
    }
    if let Some(body) = s.strip_prefix("phased:") {
        let (cycles, phases) = body
            .split_once('[')
            .and_then(|(c, r)| r.strip_suffix(']').map(|r| (c, r)))
            .ok_or_else(|| parse_err(s, "expected phased:(cycles)[phase,...]"))?;
        let phase = phases
            .split(',')
            .map(|t| parse_turn(t.trim()))
            .collect::<Result<Vec<_>>>()?;
        if phase.len() != degree {
            return Err(parse_err(s, &format!("expected {degree} phases")));
        }
        return PhasedPermutation::new(parse_cycles(cycles, degree)?, phase);
    }
    Err(parse_err(s, "expected trivial, id, perm:(..) or phased:(..)[..]"))
}

impl FromStr for PhasedPermutation {
    type Err = Error;

    /// Degree is taken from the phase list (`phased:`) or the largest index.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let degree = if let Some((_, r)) = s.split_once('[') {
            r.split(',').count()
        } else {
            s.split(|c: char| !c.is_ascii_digit())
                .filter_map(|t| t.parse::<usize>().ok())
                .max()
                .map_or(1, |m| m + 1)
        };
        parse_generator(s, degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pnorm::max_abs_diff;

    fn z(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample(n: usize, seed: u64) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            let x = (seed as f64 + 1.7 * i as f64 + 0.3 * j as f64).sin();
            z(x, (x * 3.1 + j as f64).cos())
        })
    }

    #[test]
    fn conjugate_matches_matrix_product() {
        let u = PhasedPermutation::new(vec![2, 0, 1], vec![z(0.0, 1.0), z(-1.0, 0.0), root_of_unity(1, 3)]).unwrap();
        let a = sample(3, 4);
        let m = u.to_matrix();
        let inv = u.inverse().to_matrix();
        assert!(max_abs_diff(&(&m * &inv), &CMatrix::identity(3, 3)) < 1e-15);
        assert!(max_abs_diff(&u.conjugate(&a), &(&m * &a * &inv)) < 1e-14);
        assert!(max_abs_diff(&u.compose(&u).to_matrix(), &(&m * &m)) < 1e-15);
        assert!(max_abs_diff(&u.apply_left(&a), &(&m * &a)) < 1e-15);
    }

    #[test]
    fn kron_matches_matrix_kron() {
        let u = PhasedPermutation::new(vec![1, 0], vec![z(0.0, 1.0), z(1.0, 0.0)]).unwrap();
        let v = PhasedPermutation::new(vec![2, 0, 1], vec![z(1.0, 0.0), z(-1.0, 0.0), z(0.0, -1.0)]).unwrap();
        let k = u.kron(&v).to_matrix();
        assert!(max_abs_diff(&k, &u.to_matrix().kronecker(&v.to_matrix())) < 1e-15);
    }

    #[test]
    fn literals() {
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        let a = GroupAction::parse("perm:(0 1)", &g, 2).unwrap();
        assert_eq!(a.implementer(1).perm(), &[1, 0]);
        assert_eq!(a.to_string(), "perm:(0 1)");
        let b = GroupAction::parse("phased:(0 1)[0,1/2]", &g, 2).unwrap();
        assert!(b.implementer(1).pow(2).scalar().is_some());
        let g4 = FiniteAbelianGroup::cyclic(4).unwrap();
        assert!(GroupAction::parse("perm:(0 1 2)", &g4, 3).is_err());
        assert!(GroupAction::parse("perm:(0 1 2 3)", &g4, 4).is_ok());
        let g22: FiniteAbelianGroup = "Z2xZ2".parse().unwrap();
        assert!(GroupAction::parse("perm:(0 1);perm:(2 3)", &g22, 4).is_ok());
        assert!(GroupAction::parse("perm:(0 1)", &g22, 4).is_err());
        assert!(GroupAction::parse("perm:(0 1);perm:(1 2)", &g22, 3).is_err());
        assert!(GroupAction::parse("perm:(0 5)", &g, 2).is_err());
        assert!(GroupAction::parse("rotate", &g, 2).is_err());
        let t = GroupAction::parse("trivial", &g22, 3).unwrap();
        assert!(t.is_trivial());
    }

    #[test]
    fn clock_and_shift_commute_projectively() {
        // Z/2 x Z/2 acting on M_2 by X and Z: their commutator is -1
        let g: FiniteAbelianGroup = "Z2xZ2".parse().unwrap();
        let a = GroupAction::parse("perm:(0 1);phased:()[0,1/2]", &g, 2).unwrap();
        let x = sample(2, 1);
        for s in 0..4 {
            for t in 0..4 {
                let lhs = a.apply(g.add_idx(s, t), &x);
                let rhs = a.apply(s, &a.apply(t, &x));
                assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn from_implementers_checks_homomorphism() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let bad = vec![
            PhasedPermutation::identity(3),
            PhasedPermutation::permutation(vec![1, 0, 2]).unwrap(),
            PhasedPermutation::permutation(vec![1, 0, 2]).unwrap(),
        ];
        assert!(GroupAction::from_implementers(g.clone(), bad).is_err());
        let a = GroupAction::parse("perm:(0 1 2)", &g, 3).unwrap();
        assert!(GroupAction::from_implementers(g, a.implementers().to_vec()).is_ok());
    }
}
