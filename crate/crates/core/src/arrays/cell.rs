//! Cells of `Λ`, point patterns and the metric `d`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::gsets::FiniteSubset;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Zero,
    One,
    Star,
    Point,
}

/// One entry of `Λ`. Packed: `0` Zero, `1` One, `2` Star, `3 + p` a point
/// whose truncation to `B_r` is encoded as `p` by its [`PatternLayout`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cell(u64);

impl Cell {
    pub const ZERO: Cell = Cell(0);
    pub const ONE: Cell = Cell(1);
    pub const STAR: Cell = Cell(2);

    pub fn point(code: u64) -> Cell {
        Cell(code + 3)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn from_raw(raw: u64) -> Cell {
        Cell(raw)
    }

    pub fn kind(self) -> CellKind {
        match self.0 {
            0 => CellKind::Zero,
            1 => CellKind::One,
            2 => CellKind::Star,
            _ => CellKind::Point,
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pattern(self) -> Option<u64> {
        (self.0 >= 3).then(|| self.0 - 3)
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            CellKind::Zero => write!(f, "0"),
            CellKind::One => write!(f, "1"),
            CellKind::Star => write!(f, "*"),
            CellKind::Point => write!(f, "x#{:x}", self.0 - 3),
        }
    }
}

/// Encodes patterns over `B_r(e)` as integers: symbol `i` of the ball (in
/// canonical order) occupies bits `[i·b, (i+1)·b)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutSpec", into = "LayoutSpec")]
pub struct PatternLayout {
    dim: usize,
    r: i64,
    alphabet: u8,
    bits: u32,
    offsets: Vec<GroupElement>,
    norms: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct LayoutSpec {
    dim: usize,
    r: i64,
    alphabet: u8,
}

impl TryFrom<LayoutSpec> for PatternLayout {
    type Error = Error;

    fn try_from(s: LayoutSpec) -> Result<Self> {
        PatternLayout::new(s.dim, s.r, s.alphabet)
    }
}

impl From<PatternLayout> for LayoutSpec {
    fn from(l: PatternLayout) -> Self {
        LayoutSpec {
            dim: l.dim,
            r: l.r,
            alphabet: l.alphabet,
        }
    }
}

/// Bits available for a pattern code, leaving room for the three control
/// symbols.
const CODE_BITS: u32 = 61;

impl PatternLayout {
    pub fn new(dim: usize, r: i64, alphabet: u8) -> Result<Self> {
        if !(2..=36).contains(&alphabet) {
            return Err(Error::config(
                "arrays::layout",
                format!("alphabet size {alphabet} outside 2..=36"),
            ));
        }
        if r < 0 {
            return Err(Error::config("arrays::layout", "truncation radius must be ≥ 0"));
        }
        let bits = 32 - (alphabet as u32 - 1).leading_zeros();
        let offsets = FiniteSubset::ball(dim, r).to_vec();
        if offsets.len() as u64 * bits as u64 > CODE_BITS as u64 {
            return Err(Error::config(
                "arrays::layout",
                format!(
                    "patterns on B_{r} need {} bits, at most {CODE_BITS} are available",
                    offsets.len() as u32 * bits
                ),
            ));
        }
        let norms = offsets.iter().map(|g| g.norm_max() as u32).collect();
        Ok(PatternLayout {
            dim,
            r,
            alphabet,
            bits,
            offsets,
            norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.r
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    /// Ball offsets in canonical order; the first is the identity.
    pub fn offsets(&self) -> &[GroupElement] {
        &self.offsets
    }

    pub fn encode(&self, symbols: impl Iterator<Item = u8>) -> u64 {
        let mut code = 0u64;
        for (i, s) in symbols.enumerate() {
            code |= (s as u64) << (i as u32 * self.bits);
        }
        code
    }

    pub fn symbol(&self, code: u64, i: usize) -> u8 {
        ((code >> (i as u32 * self.bits)) & ((1u64 << self.bits) - 1)) as u8
    }

    pub fn center(&self, code: u64) -> u8 {
        self.symbol(code, 0)
    }

    pub fn symbols(&self, code: u64) -> Vec<u8> {
        (0..self.offsets.len()).map(|i| self.symbol(code, i)).collect()
    }

    /// Least radius where two patterns disagree, `None` if they agree.
    pub fn first_disagreement(&self, a: u64, b: u64) -> Option<u32> {
        let x = a ^ b;
        if x == 0 {
            return None;
        }
        let i = x.trailing_zeros() / self.bits;
        Some(self.norms[i as usize])
    }

    /// `d(c1, c2)`: `1` across kinds, `2^{-m}` for points first disagreeing
    /// at radius `m`, `0` when equal.
    pub fn cell_distance<S: Scalar>(&self, c1: Cell, c2: Cell) -> S {
        if c1 == c2 {
            return S::zero();
        }
        match (c1.pattern(), c2.pattern()) {
            (Some(a), Some(b)) => match self.first_disagreement(a, b) {
                Some(m) => S::pow2_neg(m),
                None => S::zero(),
            },
            _ => S::one(),
        }
    }
}

pub fn cell_distance<S: Scalar>(layout: &PatternLayout, c1: Cell, c2: Cell) -> S {
    layout.cell_distance(c1, c2)
}
