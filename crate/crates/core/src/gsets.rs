//! Explicit finite subsets of `Z^d` and their algebra.
//!
//! Sets are stored either as an explicit deduplicated element list (with a
//! hash index for membership) or, when the elements fill an axis-aligned
//! box, as the box bounds. Both forms expose the same element semantics; the
//! box form keeps products of large Følner sets closed-form.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::scalar::Scalar;

#[derive(Clone)]
pub struct FiniteSubset {
    dim: usize,
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    /// Nonempty box `lo ≤ g ≤ hi` coordinate-wise.
    Cuboid { lo: GroupElement, hi: GroupElement },
    /// Canonically sorted, deduplicated.
    Explicit {
        elems: Vec<GroupElement>,
        index: HashSet<GroupElement>,
    },
}

impl FiniteSubset {
    pub fn empty(dim: usize) -> Self {
        FiniteSubset {
            dim,
            repr: Repr::Explicit {
                elems: Vec::new(),
                index: HashSet::new(),
            },
        }
    }

    /// The box `[-n, n]^d`; empty for negative `n`.
    pub fn ball(dim: usize, n: i64) -> Self {
        let e = GroupElement::identity(dim);
        let mut lo = e;
        let mut hi = e;
        for axis in 0..dim {
            lo = lo.with_coord(axis, -n);
            hi = hi.with_coord(axis, n);
        }
        Self::cuboid(lo, hi)
    }

    /// The box with corners `lo` and `hi`; empty if `lo_i > hi_i` for some `i`.
    pub fn cuboid(lo: GroupElement, hi: GroupElement) -> Self {
        let dim = lo.dim();
        assert_eq!(dim, hi.dim(), "cuboid corners of different dimension");
        if (0..dim).any(|i| lo.coord(i) > hi.coord(i)) {
            return Self::empty(dim);
        }
        FiniteSubset {
            dim,
            repr: Repr::Cuboid { lo, hi },
        }
    }

    pub fn singleton(g: GroupElement) -> Self {
        Self::cuboid(g, g)
    }

    pub fn identity(dim: usize) -> Self {
        Self::singleton(GroupElement::identity(dim))
    }

    pub fn from_elements<I: IntoIterator<Item = GroupElement>>(dim: usize, it: I) -> Result<Self> {
        let mut index = HashSet::new();
        for g in it {
            if g.dim() != dim {
                return Err(Error::config(
                    "gsets::from_elements",
                    format!("element {g} is not in dimension {dim}"),
                ));
            }
            index.insert(g);
        }
        Ok(Self::from_index(dim, index))
    }

    pub fn from_coords(dim: usize, coords: &[&[i64]]) -> Result<Self> {
        let elems = coords
            .iter()
            .map(|c| GroupElement::new(c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_elements(dim, elems)
    }

    fn from_index(dim: usize, index: HashSet<GroupElement>) -> Self {
        if index.is_empty() {
            return Self::empty(dim);
        }
        let (lo, hi) = bounds_of(dim, index.iter());
        if volume(&lo, &hi) == index.len() as u128 {
            return Self::cuboid(lo, hi);
        }
        let mut elems: Vec<_> = index.iter().copied().collect();
        elems.sort_unstable();
        FiniteSubset {
            dim,
            repr: Repr::Explicit { elems, index },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Cuboid { lo, hi } => volume(lo, hi) as usize,
            Repr::Explicit { elems, .. } => elems.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match &self.repr {
            Repr::Cuboid { lo, hi } => in_box(g, lo, hi),
            Repr::Explicit { index, .. } => index.contains(g),
        }
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&GroupElement::identity(self.dim))
    }

    /// Box corners when the set is stored as a box.
    pub fn as_cuboid(&self) -> Option<(GroupElement, GroupElement)> {
        match &self.repr {
            Repr::Cuboid { lo, hi } => Some((*lo, *hi)),
            Repr::Explicit { .. } => None,
        }
    }

    /// Coordinate-wise bounding box.
    pub fn bounds(&self) -> Option<(GroupElement, GroupElement)> {
        match &self.repr {
            Repr::Cuboid { lo, hi } => Some((*lo, *hi)),
            Repr::Explicit { elems, .. } if elems.is_empty() => None,
            Repr::Explicit { elems, .. } => Some(bounds_of(self.dim, elems.iter())),
        }
    }

    /// Smallest `t` with the set inside `[-t, t]^d`; `-1` for the empty set.
    pub fn radius(&self) -> i64 {
        match self.bounds() {
            None => -1,
            Some((lo, hi)) => lo.norm_max().max(hi.norm_max()),
        }
    }

    /// True when the set is a box `[-t, t]^d` centred at the identity.
    pub fn is_centered_ball(&self) -> bool {
        match self.as_cuboid() {
            Some((lo, hi)) => {
                let t = hi.coord(0);
                (0..self.dim).all(|i| lo.coord(i) == -t && hi.coord(i) == t)
            }
            None => false,
        }
    }

    /// Elements; canonical order for explicit sets, row-major for boxes.
    pub fn iter(&self) -> Iter<'_> {
        match &self.repr {
            Repr::Cuboid { lo, hi } => Iter::Cuboid(CuboidIter::new(*lo, *hi)),
            Repr::Explicit { elems, .. } => Iter::Explicit(elems.iter()),
        }
    }

    /// Elements in canonical order.
    pub fn to_vec(&self) -> Vec<GroupElement> {
        match &self.repr {
            Repr::Cuboid { .. } => {
                let mut v: Vec<_> = self.iter().collect();
                v.sort_unstable();
                v
            }
            Repr::Explicit { elems, .. } => elems.clone(),
        }
    }

    /// Same set, forced into the explicit representation.
    pub fn to_explicit(&self) -> Self {
        match &self.repr {
            Repr::Explicit { .. } => self.clone(),
            Repr::Cuboid { .. } => {
                let elems = self.to_vec();
                let index = elems.iter().copied().collect();
                FiniteSubset {
                    dim: self.dim,
                    repr: Repr::Explicit { elems, index },
                }
            }
        }
    }

    /// Right translate `F·g`.
    pub fn translate(&self, g: &GroupElement) -> Self {
        match &self.repr {
            Repr::Cuboid { lo, hi } => Self::cuboid(lo.op(g), hi.op(g)),
            Repr::Explicit { elems, .. } => {
                Self::from_index(self.dim, elems.iter().map(|x| x.op(g)).collect())
            }
        }
    }

    /// `F^{-1}`.
    pub fn inverse(&self) -> Self {
        match &self.repr {
            Repr::Cuboid { lo, hi } => Self::cuboid(hi.inv(), lo.inv()),
            Repr::Explicit { elems, .. } => {
                Self::from_index(self.dim, elems.iter().map(|x| x.inv()).collect())
            }
        }
    }

    /// `AF = {af : a ∈ A, f ∈ F}`.
    pub fn product(&self, other: &FiniteSubset) -> Self {
        assert_eq!(self.dim, other.dim, "product of sets of different dimension");
        if self.is_empty() || other.is_empty() {
            return Self::empty(self.dim);
        }
        if let (Repr::Cuboid { lo: a, hi: b }, Repr::Cuboid { lo: c, hi: d }) =
            (&self.repr, &other.repr)
        {
            return Self::cuboid(a.op(c), b.op(d));
        }
        if self.len() == 1 {
            let g = self.iter().next().unwrap();
            return other.translate(&g);
        }
        if other.len() == 1 {
            let g = other.iter().next().unwrap();
            return self.translate(&g);
        }
        let mut index = HashSet::with_capacity(self.len().saturating_mul(2));
        for a in self.iter() {
            for f in other.iter() {
                index.insert(a.op(&f));
            }
        }
        Self::from_index(self.dim, index)
    }

    /// `F^l`, the `l`-fold product. `l = 0` gives `{e}`.
    pub fn power(&self, l: u32) -> Self {
        if !self.contains_identity() {
            log::warn!("power of a set without the identity; powers are not nested");
        }
        let mut acc = FiniteSubset::identity(self.dim);
        for _ in 0..l {
            acc = acc.product(self);
        }
        acc
    }

    /// `F^{-1}F`.
    pub fn difference_set(&self) -> Self {
        self.inverse().product(self)
    }

    pub fn union(&self, other: &FiniteSubset) -> Self {
        if other.is_subset(self) {
            return self.clone();
        }
        if self.is_subset(other) {
            return other.clone();
        }
        Self::from_index(self.dim, self.iter().chain(other.iter()).collect())
    }

    pub fn intersection(&self, other: &FiniteSubset) -> Self {
        if let (Some((a, b)), Some((c, d))) = (self.as_cuboid(), other.as_cuboid()) {
            let mut lo = a;
            let mut hi = b;
            for i in 0..self.dim {
                lo = lo.with_coord(i, a.coord(i).max(c.coord(i)));
                hi = hi.with_coord(i, b.coord(i).min(d.coord(i)));
            }
            return Self::cuboid(lo, hi);
        }
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Self::from_index(self.dim, small.iter().filter(|g| big.contains(g)).collect())
    }

    /// `self \ other`.
    pub fn difference(&self, other: &FiniteSubset) -> Self {
        Self::from_index(self.dim, self.iter().filter(|g| !other.contains(g)).collect())
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        if self.is_empty() {
            return true;
        }
        if self.len() > other.len() {
            return false;
        }
        match (&self.repr, &other.repr) {
            (_, Repr::Cuboid { lo, hi }) => {
                let (a, b) = self.bounds().unwrap();
                in_box(&a, lo, hi) && in_box(&b, lo, hi)
            }
            _ => self.iter().all(|g| other.contains(&g)),
        }
    }

    pub fn intersects(&self, other: &FiniteSubset) -> bool {
        if let (Some((a, b)), Some((c, d))) = (self.bounds(), other.bounds()) {
            if (0..self.dim).any(|i| b.coord(i) < c.coord(i) || d.coord(i) < a.coord(i)) {
                return false;
            }
        } else {
            return false;
        }
        if self.as_cuboid().is_some() && other.as_cuboid().is_some() {
            return true;
        }
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().any(|g| big.contains(&g))
    }

    /// `|A △ B|`.
    pub fn sym_diff_size(&self, other: &FiniteSubset) -> usize {
        let common = self.intersection(other).len();
        self.len() + other.len() - 2 * common
    }

    /// `(A, δ)`-invariance of `self = F`: `|AF| < (1+δ)|F|` when `e ∈ A`,
    /// `|F △ AF| / |F| < δ` otherwise.
    pub fn is_invariant<S: Scalar>(&self, a: &FiniteSubset, delta: S) -> Result<bool> {
        if !(delta > S::zero() && delta < S::one()) {
            return Err(Error::argument(
                "gsets::is_invariant",
                format!("δ = {delta} outside (0, 1)"),
            ));
        }
        if self.is_empty() {
            return Ok(false);
        }
        let af = a.product(self);
        let f = S::from_count(self.len());
        if a.contains_identity() {
            Ok(S::from_count(af.len()) < (S::one() + delta) * f)
        } else {
            Ok(S::from_count(self.sym_diff_size(&af)) < delta * f)
        }
    }

    /// One element per line, coordinates separated by commas.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for g in self.to_vec() {
            let line: Vec<String> = g.coords().iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses [`FiniteSubset::to_text`] output. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse_text(dim: usize, text: &str) -> Result<Self> {
        let mut elems = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords = line
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| {
                    Error::config("gsets::parse_text", format!("line {}: {e}", no + 1))
                })?;
            elems.push(GroupElement::new(&coords)?);
        }
        Self::from_elements(dim, elems)
    }
}

impl PartialEq for FiniteSubset {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.len() == other.len() && self.is_subset(other)
    }
}

impl Eq for FiniteSubset {}

impl fmt::Debug for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Cuboid { lo, hi } => write!(f, "Box[{lo}..={hi}]"),
            Repr::Explicit { elems, .. } if elems.len() <= 16 => {
                f.debug_set().entries(elems.iter()).finish()
            }
            Repr::Explicit { elems, .. } => write!(f, "Set(|{}|)", elems.len()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SetRepr {
    Box { lo: GroupElement, hi: GroupElement },
    Elements { dim: usize, elements: Vec<GroupElement> },
}

impl Serialize for FiniteSubset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.repr {
            Repr::Cuboid { lo, hi } => SetRepr::Box { lo: *lo, hi: *hi },
            Repr::Explicit { elems, .. } => SetRepr::Elements {
                dim: self.dim,
                elements: elems.clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteSubset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match SetRepr::deserialize(d)? {
            SetRepr::Box { lo, hi } => {
                if lo.dim() != hi.dim() {
                    return Err(serde::de::Error::custom("box corners differ in dimension"));
                }
                Ok(FiniteSubset::cuboid(lo, hi))
            }
            SetRepr::Elements { dim, elements } => {
                FiniteSubset::from_elements(dim, elements).map_err(serde::de::Error::custom)
            }
        }
    }
}

pub enum Iter<'a> {
    Cuboid(CuboidIter),
    Explicit(std::slice::Iter<'a, GroupElement>),
}

impl Iterator for Iter<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        match self {
            Iter::Cuboid(it) => it.next(),
            Iter::Explicit(it) => it.next().copied(),
        }
    }
}

/// Row-major walk of a box, last axis fastest.
pub struct CuboidIter {
    lo: GroupElement,
    hi: GroupElement,
    cur: Option<GroupElement>,
}

impl CuboidIter {
    pub fn new(lo: GroupElement, hi: GroupElement) -> Self {
        let empty = (0..lo.dim()).any(|i| lo.coord(i) > hi.coord(i));
        CuboidIter {
            lo,
            hi,
            cur: if empty { None } else { Some(lo) },
        }
    }
}

impl Iterator for CuboidIter {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let out = self.cur?;
        let mut next = out;
        let mut axis = self.lo.dim();
        loop {
            if axis == 0 {
                self.cur = None;
                break;
            }
            axis -= 1;
            if next.coord(axis) < self.hi.coord(axis) {
                next = next.with_coord(axis, next.coord(axis) + 1);
                self.cur = Some(next);
                break;
            }
            next = next.with_coord(axis, self.lo.coord(axis));
        }
        Some(out)
    }
}

pub(crate) fn in_box(g: &GroupElement, lo: &GroupElement, hi: &GroupElement) -> bool {
    (0..g.dim()).all(|i| lo.coord(i) <= g.coord(i) && g.coord(i) <= hi.coord(i))
}

pub(crate) fn volume(lo: &GroupElement, hi: &GroupElement) -> u128 {
    (0..lo.dim())
        .map(|i| (hi.coord(i) - lo.coord(i) + 1).max(0) as u128)
        .product()
}

fn bounds_of<'a, I: Iterator<Item = &'a GroupElement>>(dim: usize, it: I) -> (GroupElement, GroupElement) {
    let mut lo = [i64::MAX; crate::group::MAX_DIM];
    let mut hi = [i64::MIN; crate::group::MAX_DIM];
    for g in it {
        for i in 0..dim {
            lo[i] = lo[i].min(g.coord(i));
            hi[i] = hi[i].max(g.coord(i));
        }
    }
    (
        GroupElement::from_slice(&lo[..dim]),
        GroupElement::from_slice(&hi[..dim]),
    )
}
