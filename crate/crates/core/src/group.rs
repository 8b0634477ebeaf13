//! Finite abelian groups `Z/n1 x ... x Z/nk`, their duals and characters.
//!
//! Elements are stored as coordinate vectors and enumerated lexicographically
//! (last coordinate fastest). The dual group uses the same coordinate lattice:
//! the character with coordinates `g` evaluates at `s` to
//! `exp(2 pi i sum_j g_j s_j / n_j)`.
//!
//! Haar measures: counting measure on `G`, normalized counting measure (total
//! mass one) on the dual.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FiniteAbelianGroup {
    factors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualCharacter {
    pub coords: Vec<usize>,
}

impl FiniteAbelianGroup {
    /// Factors equal to one are dropped, so `Z1 x Z3` and `Z3` are the same group.
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.contains(&0) {
            return invalid("cyclic factors must be positive");
        }
        Ok(Self {
            factors: factors.into_iter().filter(|&n| n > 1).collect(),
        })
    }

    pub fn trivial() -> Self {
        Self { factors: vec![] }
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.factors.len()],
        }
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order()).map(|i| self.element(i)).collect()
    }

    pub fn element(&self, index: usize) -> GroupElement {
        let mut coords = vec![0; self.factors.len()];
        let mut rest = index;
        for (c, &n) in coords.iter_mut().zip(&self.factors).rev() {
            *c = rest % n;
            rest /= n;
        }
        GroupElement { coords }
    }

    pub fn character(&self, index: usize) -> DualCharacter {
        DualCharacter {
            coords: self.element(index).coords,
        }
    }

    pub fn characters(&self) -> Vec<DualCharacter> {
        (0..self.order()).map(|i| self.character(i)).collect()
    }

    pub fn index_of(&self, s: &GroupElement) -> Result<usize> {
        self.check_coords(&s.coords)?;
        Ok(self.index_of_coords(&s.coords))
    }

    pub fn index_of_character(&self, g: &DualCharacter) -> Result<usize> {
        self.check_coords(&g.coords)?;
        Ok(self.index_of_coords(&g.coords))
    }

    fn index_of_coords(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if coords.len() != self.factors.len() {
            return invalid(format!(
                "coordinate vector of length {} does not match group {}",
                coords.len(),
                self
            ));
        }
        if let Some((c, n)) = coords.iter().zip(&self.factors).find(|(&c, &n)| c >= n) {
            return invalid(format!("coordinate {c} out of range for factor Z{n}"));
        }
        Ok(())
    }

    pub fn add(&self, s: &GroupElement, t: &GroupElement) -> GroupElement {
        GroupElement {
            coords: s
                .coords
                .iter()
                .zip(&t.coords)
                .zip(&self.factors)
                .map(|((&a, &b), &n)| (a + b) % n)
                .collect(),
        }
    }

    pub fn neg(&self, s: &GroupElement) -> GroupElement {
        GroupElement {
            coords: s
                .coords
                .iter()
                .zip(&self.factors)
                .map(|(&a, &n)| (n - a) % n)
                .collect(),
        }
    }

    /// Index arithmetic on the lexicographic enumeration.
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        let (mut a, mut b) = (a, b);
        for &n in self.factors.iter().rev() {
            out += ((a % n + b % n) % n) * stride;
            a /= n;
            b /= n;
            stride *= n;
        }
        out
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        let mut a = a;
        for &n in self.factors.iter().rev() {
            out += ((n - a % n) % n) * stride;
            a /= n;
            stride *= n;
        }
        out
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    /// `gamma(s)` for character index `gamma` and element index `s`.
    pub fn pairing_idx(&self, gamma: usize, s: usize) -> C64 {
        let g = self.element(gamma).coords;
        let s = self.element(s).coords;
        self.pairing_coords(&g, &s)
    }

    fn pairing_coords(&self, g: &[usize], s: &[usize]) -> C64 {
        // accumulate the angle as a fraction over lcm(factors) before exponentiating
        let l = self.factors.iter().fold(1usize, |acc, &n| lcm(acc, n));
        let num = g
            .iter()
            .zip(s)
            .zip(&self.factors)
            .fold(0usize, |acc, ((&gj, &sj), &n)| {
                (acc + (gj * sj % n) * (l / n)) % l
            });
        root_of_unity(num, l)
    }

    /// Character table `[gamma, s] = gamma(s)`.
    pub fn character_table(&self) -> DMatrix<C64> {
        let n = self.order();
        DMatrix::from_fn(n, n, |g, s| self.pairing_idx(g, s))
    }

    pub fn dual(&self) -> FiniteAbelianGroup {
        self.clone()
    }
}

/// `exp(2 pi i num / den)`, exact at multiples of a quarter turn.
pub fn root_of_unity(num: usize, den: usize) -> C64 {
    let num = num % den;
    if (4 * num).is_multiple_of(den) {
        return match 4 * num / den {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let theta = TAU * num as f64 / den as f64;
    C64::new(theta.cos(), theta.sin())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Character pairing `gamma(s)`.
pub fn pairing(group: &FiniteAbelianGroup, gamma: &DualCharacter, s: &GroupElement) -> Result<C64> {
    group.check_coords(&gamma.coords)?;
    group.check_coords(&s.coords)?;
    Ok(group.pairing_coords(&gamma.coords, &s.coords))
}

/// Fourier transform of a function on the dual group:
/// `fhat(t) = (1/|G|) sum_gamma f(gamma) conj(gamma(t))`.
pub fn fourier_transform(group: &FiniteAbelianGroup, f: &[C64]) -> Result<Vec<C64>> {
    let n = group.order();
    if f.len() != n {
        return invalid(format!("function has {} values, group has order {n}", f.len()));
    }
    let w = 1.0 / n as f64;
    Ok((0..n)
        .map(|t| {
            (0..n)
                .map(|g| f[g] * group.pairing_idx(g, t).conj())
                .sum::<C64>()
                * w
        })
        .collect())
}

/// Inverse of [`fourier_transform`]: `f(gamma) = sum_t fhat(t) gamma(t)`.
pub fn inverse_fourier_transform(group: &FiniteAbelianGroup, fhat: &[C64]) -> Result<Vec<C64>> {
    let n = group.order();
    if fhat.len() != n {
        return invalid(format!("function has {} values, group has order {n}", fhat.len()));
    }
    Ok((0..n)
        .map(|g| (0..n).map(|t| fhat[t] * group.pairing_idx(g, t)).sum())
        .collect())
}

pub fn dual_group(group: &FiniteAbelianGroup) -> FiniteAbelianGroup {
    group.dual()
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "Z1");
        }
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |hint: &str| Error::Parse {
            what: "group literal",
            input: s.to_string(),
            hint: hint.to_string(),
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(parse_err("write a product of cyclic factors such as Z4 or Z2xZ2"));
        }
        let mut factors = Vec::new();
        for part in trimmed.split(['x', 'X', '*']) {
            let digits = part
                .trim()
                .strip_prefix('Z')
                .ok_or_else(|| parse_err("each factor must look like Zn, e.g. Z3"))?;
            let n: usize = digits
                .parse()
                .map_err(|_| parse_err("the order after Z must be a positive integer"))?;
            if n == 0 {
                return Err(parse_err("Z0 is not a finite group; use Z1 for the trivial group"));
            }
            factors.push(n);
        }
        Self::new(factors)
    }
}

impl TryFrom<String> for FiniteAbelianGroup {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FiniteAbelianGroup> for String {
    fn from(g: FiniteAbelianGroup) -> String {
        g.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn literals_round_trip() {
        for lit in ["Z4", "Z2xZ2", "Z1", "Z2xZ3"] {
            let g: FiniteAbelianGroup = lit.parse().unwrap();
            assert_eq!(g.to_string(), lit);
        }
        assert_eq!("Z1xZ3".parse::<FiniteAbelianGroup>().unwrap().factors(), &[3]);
        assert!("Z0".parse::<FiniteAbelianGroup>().is_err());
        assert!("Q4".parse::<FiniteAbelianGroup>().is_err());
        assert!("".parse::<FiniteAbelianGroup>().is_err());
    }

    #[test]
    fn trivial_group_has_one_element() {
        let g = FiniteAbelianGroup::trivial();
        assert_eq!(g.order(), 1);
        assert_eq!(g.elements(), vec![g.identity()]);
        assert_eq!(g.pairing_idx(0, 0), C64::new(1.0, 0.0));
    }

    #[test]
    fn enumeration_is_lexicographic_and_indexed() {
        let g: FiniteAbelianGroup = "Z2xZ3".parse().unwrap();
        let els = g.elements();
        assert_eq!(els.len(), 6);
        assert_eq!(els[1].coords, vec![0, 1]);
        assert_eq!(els[3].coords, vec![1, 0]);
        for (i, e) in els.iter().enumerate() {
            assert_eq!(g.index_of(e).unwrap(), i);
        }
    }

    #[test]
    fn index_arithmetic_matches_coordinates() {
        let g: FiniteAbelianGroup = "Z2xZ4".parse().unwrap();
        for a in 0..g.order() {
            for b in 0..g.order() {
                let sum = g.add(&g.element(a), &g.element(b));
                assert_eq!(g.add_idx(a, b), g.index_of(&sum).unwrap());
            }
            assert_eq!(g.add_idx(a, g.neg_idx(a)), 0);
        }
    }

    #[test]
    fn pairing_examples() {
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        let v = pairing(
            &z4,
            &DualCharacter { coords: vec![1] },
            &GroupElement { coords: vec![3] },
        )
        .unwrap();
        assert!(close(v, C64::new(0.0, -1.0), 1e-15));

        let k4: FiniteAbelianGroup = "Z2xZ2".parse().unwrap();
        let v = pairing(
            &k4,
            &DualCharacter { coords: vec![1, 1] },
            &GroupElement { coords: vec![1, 0] },
        )
        .unwrap();
        assert!(close(v, C64::new(-1.0, 0.0), 1e-15));

        let z6: FiniteAbelianGroup = "Z2xZ3".parse().unwrap();
        for s in z6.elements() {
            let v = pairing(&z6, &DualCharacter { coords: vec![0, 0] }, &s).unwrap();
            assert_eq!(v, C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn pairing_rejects_shape_mismatch() {
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        let err = pairing(
            &z4,
            &DualCharacter { coords: vec![1, 0] },
            &GroupElement { coords: vec![1] },
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        let err = pairing(
            &z4,
            &DualCharacter { coords: vec![4] },
            &GroupElement { coords: vec![1] },
        );
        assert!(err.is_err());
    }

    #[test]
    fn character_orthogonality() {
        for lit in ["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "Z2xZ3", "Z3xZ3"] {
            let g: FiniteAbelianGroup = lit.parse().unwrap();
            let n = g.order();
            for s in 0..n {
                let sum: C64 = (0..n).map(|gm| g.pairing_idx(gm, s)).sum();
                let expected = if s == 0 { n as f64 } else { 0.0 };
                assert!(close(sum, C64::new(expected, 0.0), 1e-12), "{lit} s={s}");
            }
        }
    }

    #[test]
    fn fourier_examples() {
        let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
        let f = [C64::new(2.0, 0.0), C64::new(0.0, 0.0)];
        let fh = fourier_transform(&z2, &f).unwrap();
        assert!(close(fh[0], C64::new(1.0, 0.0), 1e-15));
        assert!(close(fh[1], C64::new(1.0, 0.0), 1e-15));

        let g: FiniteAbelianGroup = "Z2xZ3".parse().unwrap();
        let ones = vec![C64::new(1.0, 0.0); g.order()];
        let fh = fourier_transform(&g, &ones).unwrap();
        for (t, v) in fh.iter().enumerate() {
            let e = if t == 0 { 1.0 } else { 0.0 };
            assert!(close(*v, C64::new(e, 0.0), 1e-12));
        }

        let t0 = 4;
        let f: Vec<C64> = (0..g.order()).map(|gm| g.pairing_idx(gm, t0)).collect();
        let fh = fourier_transform(&g, &f).unwrap();
        for (t, v) in fh.iter().enumerate() {
            let e = if t == t0 { 1.0 } else { 0.0 };
            assert!(close(*v, C64::new(e, 0.0), 1e-12));
        }
    }

    #[test]
    fn dual_group_has_same_factors() {
        for lit in ["Z4", "Z1", "Z2xZ3"] {
            let g: FiniteAbelianGroup = lit.parse().unwrap();
            assert_eq!(dual_group(&g), g);
        }
    }

    #[test]
    fn double_dual_evaluation_is_symmetric() {
        // evaluating t in G as a character of the dual: t(gamma) = gamma(t)
        let g: FiniteAbelianGroup = "Z2xZ4".parse().unwrap();
        let gd = dual_group(&g);
        for a in 0..g.order() {
            for b in 0..g.order() {
                assert_eq!(g.pairing_idx(a, b), gd.pairing_idx(b, a));
            }
        }
    }
}
