//! The lattice `Z^d`, written multiplicatively to match the usual notation
//! for amenable groups: `a·b` is coordinate-wise addition.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gsets::FiniteSubset;

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// An element of `Z^d`, stored inline.
///
/// Ordering is the canonical order: max-norm ascending, ties broken
/// lexicographically. The identity is the minimum.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl GroupElement {
    pub fn new(coords: &[i64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::config(
                "group::element",
                format!("dimension {} outside 1..={MAX_DIM}", coords.len()),
            ));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(GroupElement {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    /// Panicking constructor for literals in tests and fixtures.
    pub fn from_slice(coords: &[i64]) -> Self {
        Self::new(coords).expect("valid dimension")
    }

    pub fn identity(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        GroupElement {
            dim: dim as u8,
            coords: [0; MAX_DIM],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i64 {
        self.coords[axis]
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn norm_max(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Group product; errors when the dimensions differ.
    pub fn mul(&self, other: &GroupElement) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::config(
                "group::mul",
                format!("dimension mismatch: {} vs {}", self.dim, other.dim),
            ));
        }
        Ok(self.op(other))
    }

    /// Unchecked product for callers that already hold equal dimensions.
    #[inline]
    pub fn op(&self, other: &GroupElement) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(other.coords.iter()) {
            *a += b;
        }
        GroupElement { dim: self.dim, coords: c }
    }

    #[inline]
    pub fn inv(&self) -> Self {
        let mut c = self.coords;
        for a in c.iter_mut() {
            *a = -*a;
        }
        GroupElement { dim: self.dim, coords: c }
    }

    /// `self · other^{-1}`.
    #[inline]
    pub fn div(&self, other: &GroupElement) -> Self {
        self.op(&other.inv())
    }

    pub fn with_coord(&self, axis: usize, value: i64) -> Self {
        let mut g = *self;
        g.coords[axis] = value;
        g
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.norm_max()
            .cmp(&other.norm_max())
            .then_with(|| self.coords().cmp(other.coords()))
            .then_with(|| self.dim.cmp(&other.dim))
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        GroupElement::new(&v).map_err(serde::de::Error::custom)
    }
}

/// `Z^d` together with its canonical Følner family of boxes `[-n, n]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    dim: usize,
}

impl Group {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::config(
                "group::new",
                format!("dimension {dim} outside 1..={MAX_DIM}"),
            ));
        }
        Ok(Group { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.dim)
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        let g = GroupElement::new(coords)?;
        if g.dim() != self.dim {
            return Err(Error::config(
                "group::element",
                format!("expected {} coordinates, got {}", self.dim, coords.len()),
            ));
        }
        Ok(g)
    }

    /// The Følner box `F_n = [-n, n]^d`. `n = 0` yields `{e}`.
    pub fn folner(&self, n: i64) -> FiniteSubset {
        FiniteSubset::ball(self.dim, n)
    }

    /// Smallest `n ≤ max_n` with `F_n` being `(A, δ)`-invariant.
    pub fn first_invariant_index<S: crate::Scalar>(
        &self,
        a: &FiniteSubset,
        delta: S,
        max_n: i64,
    ) -> Result<Option<i64>> {
        for n in 1..=max_n {
            if self.folner(n).is_invariant(a, delta)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// Checks nestedness, `e ∈ F_n`, symmetry and exhaustion (of the ball of
    /// radius `n`) for every `n ≤ bound`, by enumeration.
    pub fn check_folner_properties(&self, bound: i64) -> std::result::Result<(), String> {
        let e = self.identity();
        let mut prev: Option<FiniteSubset> = None;
        for n in 1..=bound {
            let f = self.folner(n).to_explicit();
            if !f.contains(&e) {
                return Err(format!("e not in F_{n}"));
            }
            if f != f.inverse() {
                return Err(format!("F_{n} not symmetric"));
            }
            if let Some(p) = &prev {
                if !p.is_subset(&f) {
                    return Err(format!("F_{} not contained in F_{n}", n - 1));
                }
            }
            let exhausted = f
                .iter()
                .filter(|g| g.norm_max() <= n)
                .count();
            if exhausted as u64 != (2 * n as u64 + 1).pow(self.dim as u32) {
                return Err(format!("F_{n} misses part of the radius-{n} ball"));
            }
            prev = Some(f);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(c: &[i64]) -> GroupElement {
        GroupElement::from_slice(c)
    }

    #[test]
    fn product_is_coordinatewise_sum() {
        assert_eq!(g(&[1, 2]).mul(&g(&[3, -1])).unwrap(), g(&[4, 1]));
        assert_eq!(GroupElement::identity(2).mul(&g(&[5, 7])).unwrap(), g(&[5, 7]));
        assert_eq!(g(&[2, -3]).mul(&g(&[2, -3]).inv()).unwrap(), g(&[0, 0]));
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let err = g(&[1]).mul(&g(&[1, 2])).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn inverse_negates() {
        assert_eq!(g(&[2, -3]).inv(), g(&[-2, 3]));
        assert_eq!(GroupElement::identity(3).inv(), GroupElement::identity(3));
        let x = g(&[4, -9, 1]);
        assert_eq!(x.inv().inv(), x);
    }

    #[test]
    fn group_laws_exhaustive_on_small_ball() {
        let pts: Vec<_> = Group::new(2).unwrap().folner(3).to_vec();
        let e = GroupElement::identity(2);
        for a in &pts {
            assert_eq!(e.op(a), *a);
            assert!(a.op(&a.inv()).is_identity());
            for b in &pts {
                for c in pts.iter().step_by(7) {
                    assert_eq!(a.op(b).op(c), a.op(&b.op(c)));
                }
            }
        }
    }

    #[test]
    fn canonical_order_puts_identity_first() {
        let mut v = vec![g(&[1, 0]), g(&[0, 0]), g(&[-1, 1]), g(&[0, -1]), g(&[2, 0])];
        v.sort();
        assert_eq!(v, vec![g(&[0, 0]), g(&[-1, 1]), g(&[0, -1]), g(&[1, 0]), g(&[2, 0])]);
    }

    #[test]
    fn folner_boxes() {
        let z = Group::new(1).unwrap();
        let f2 = z.folner(2).to_vec();
        assert_eq!(f2.len(), 5);
        assert_eq!(f2[0], g(&[0]));
        assert_eq!(Group::new(2).unwrap().folner(1).len(), 9);
        for n in 1..=50 {
            let f = z.folner(n);
            assert_eq!(f, f.inverse());
        }
        z.check_folner_properties(50).unwrap();
        Group::new(2).unwrap().check_folner_properties(8).unwrap();
    }

    #[test]
    fn invariance_scan_terminates() {
        let z = Group::new(1).unwrap();
        let a = FiniteSubset::from_coords(1, &[&[-1], &[0], &[1]]).unwrap();
        // |A F_n| = 2n+3 < (1+δ)(2n+1)  <=>  n > 1/δ - 1/2
        assert_eq!(z.first_invariant_index(&a, 0.1, 1000).unwrap(), Some(10));
        assert_eq!(z.first_invariant_index(&a, 0.05, 1000).unwrap(), Some(20));
    }
}
