//! Base samples, columns and finite windows of `Λ^G`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cell::{Cell, PatternLayout};
use crate::error::{Error, Result};
use crate::grid::BoxIndex;
use crate::group::GroupElement;
use crate::gsets::FiniteSubset;
use crate::scalar::Scalar;

/// A pattern of the base subshift on a box.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "BaseRepr", into = "BaseRepr")]
pub struct BasePattern {
    index: BoxIndex,
    alphabet: u8,
    symbols: Vec<u8>,
}

/// Symbols are written row-major as base-36 digits.
#[derive(serde::Serialize, serde::Deserialize)]
struct BaseRepr {
    lo: GroupElement,
    hi: GroupElement,
    alphabet: u8,
    symbols: String,
}

impl From<BasePattern> for BaseRepr {
    fn from(b: BasePattern) -> Self {
        BaseRepr {
            lo: b.index.lo(),
            hi: b.index.hi(),
            alphabet: b.alphabet,
            symbols: b
                .symbols
                .iter()
                .map(|&s| char::from_digit(s as u32, 36).expect("alphabet ≤ 36"))
                .collect(),
        }
    }
}

impl TryFrom<BaseRepr> for BasePattern {
    type Error = String;

    fn try_from(r: BaseRepr) -> std::result::Result<Self, String> {
        let index = BoxIndex::new(r.lo, r.hi).ok_or("empty sample box")?;
        let symbols: Vec<u8> = r
            .symbols
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as u8).filter(|&d| d < r.alphabet))
            .collect::<Option<_>>()
            .ok_or("symbol outside the alphabet")?;
        if symbols.len() != index.len() {
            return Err(format!("{} symbols for a box of {}", symbols.len(), index.len()));
        }
        Ok(BasePattern {
            index,
            alphabet: r.alphabet,
            symbols,
        })
    }
}

impl BasePattern {
    pub fn from_fn(
        lo: GroupElement,
        hi: GroupElement,
        alphabet: u8,
        f: impl Fn(&GroupElement) -> u8,
    ) -> Result<Self> {
        let index = BoxIndex::new(lo, hi)
            .ok_or_else(|| Error::argument("arrays::base", "empty sample box"))?;
        let symbols = (0..index.len()).map(|i| f(&index.point(i))).collect::<Vec<_>>();
        if symbols.iter().any(|&s| s >= alphabet) {
            return Err(Error::argument("arrays::base", "symbol outside the alphabet"));
        }
        Ok(BasePattern {
            index,
            alphabet,
            symbols,
        })
    }

    /// I.i.d. uniform symbols, filled row-major from a ChaCha8 stream.
    pub fn full_shift(lo: GroupElement, hi: GroupElement, alphabet: u8, seed: u64) -> Result<Self> {
        let index = BoxIndex::new(lo, hi)
            .ok_or_else(|| Error::argument("arrays::base", "empty sample box"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let symbols = (0..index.len()).map(|_| rng.gen_range(0..alphabet)).collect();
        Ok(BasePattern {
            index,
            alphabet,
            symbols,
        })
    }

    /// A point of the one-dimensional shift of finite type avoiding
    /// `forbidden`, filled left to right; each symbol is drawn uniformly
    /// among those completing no forbidden word.
    pub fn sft(
        lo: GroupElement,
        hi: GroupElement,
        alphabet: u8,
        forbidden: &[Vec<u8>],
        seed: u64,
    ) -> Result<Self> {
        if lo.dim() != 1 {
            return Err(Error::config(
                "arrays::base",
                "shifts of finite type are generated in dimension 1 only",
            ));
        }
        if forbidden.iter().any(|w| w.is_empty() || w.iter().any(|&s| s >= alphabet)) {
            return Err(Error::config("arrays::base", "malformed forbidden word"));
        }
        let index = BoxIndex::new(lo, hi)
            .ok_or_else(|| Error::argument("arrays::base", "empty sample box"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut symbols: Vec<u8> = Vec::with_capacity(index.len());
        let mut allowed = Vec::with_capacity(alphabet as usize);
        for i in 0..index.len() {
            allowed.clear();
            for s in 0..alphabet {
                symbols.push(s);
                let ok = forbidden.iter().all(|w| !symbols.ends_with(w));
                symbols.pop();
                if ok {
                    allowed.push(s);
                }
            }
            if allowed.is_empty() {
                return Err(Error::config(
                    "arrays::base",
                    format!("forbidden words leave no continuation at position {}", lo.coord(0) + i as i64),
                ));
            }
            symbols.push(allowed[rng.gen_range(0..allowed.len())]);
        }
        Ok(BasePattern {
            index,
            alphabet,
            symbols,
        })
    }

    /// `x_g = word[(g_1 + … + g_d) mod |word|]`.
    pub fn periodic(lo: GroupElement, hi: GroupElement, alphabet: u8, word: &[u8]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::argument("arrays::base", "empty period word"));
        }
        let n = word.len() as i64;
        Self::from_fn(lo, hi, alphabet, |g| {
            word[g.coords().iter().sum::<i64>().rem_euclid(n) as usize]
        })
    }

    pub fn lo(&self) -> GroupElement {
        self.index.lo()
    }

    pub fn hi(&self) -> GroupElement {
        self.index.hi()
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn get(&self, g: &GroupElement) -> Option<u8> {
        self.index.index(g).map(|i| self.symbols[i])
    }

    pub fn crop(&self, lo: GroupElement, hi: GroupElement) -> Result<Self> {
        let index = BoxIndex::new(lo, hi)
            .ok_or_else(|| Error::argument("arrays::base", "empty crop"))?;
        if !self.index.contains(&lo) || !self.index.contains(&hi) {
            return Err(Error::argument("arrays::base", "crop leaves the sample"));
        }
        let symbols = (0..index.len())
            .map(|i| self.symbols[self.index.index_unchecked(&index.point(i))])
            .collect();
        Ok(BasePattern {
            index,
            alphabet: self.alphabet,
            symbols,
        })
    }

    /// Frequency table of the patterns of `x` on the translates `Pg` inside
    /// the box `[lo, hi]`, keyed by symbol sequence in the order of `p`.
    pub fn pattern_counts(
        &self,
        p: &[GroupElement],
        lo: &GroupElement,
        hi: &GroupElement,
    ) -> std::collections::BTreeMap<Vec<u8>, usize> {
        let mut out = std::collections::BTreeMap::new();
        if let Some(region) = BoxIndex::new(*lo, *hi) {
            for i in 0..region.len() {
                let g = region.point(i);
                let key: Option<Vec<u8>> = p.iter().map(|u| self.get(&u.op(&g))).collect();
                if let Some(key) = key {
                    *out.entry(key).or_insert(0) += 1;
                }
            }
        }
        out
    }
}

/// A bi-indexed stack of cells; rows outside `[-K, K]` are Zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Column {
    cells: Vec<Cell>,
}

impl Column {
    pub fn zero(band: usize) -> Self {
        Column {
            cells: vec![Cell::ZERO; 2 * band + 1],
        }
    }

    pub fn from_cells(cells: Vec<Cell>) -> Result<Self> {
        if cells.len().is_multiple_of(2) {
            return Err(Error::argument("arrays::column", "a band holds an odd number of rows"));
        }
        Ok(Column { cells })
    }

    pub fn band(&self) -> usize {
        self.cells.len() / 2
    }

    pub fn get(&self, row: i32) -> Cell {
        row_of(&self.cells, row)
    }

    pub fn set(&mut self, row: i32, c: Cell) -> Result<()> {
        let k = self.band() as i32;
        if row.abs() > k {
            return Err(Error::argument("arrays::column", format!("row {row} outside band {k}")));
        }
        self.cells[(row + k) as usize] = c;
        Ok(())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
}

pub(crate) fn row_of(cells: &[Cell], row: i32) -> Cell {
    let k = (cells.len() / 2) as i32;
    if row.abs() > k {
        Cell::ZERO
    } else {
        cells[(row + k) as usize]
    }
}

/// `Σ_n 2^{-|n|} d(c1_n, c2_n)`.
pub fn column_distance<S: Scalar>(layout: &PatternLayout, c1: &[Cell], c2: &[Cell]) -> Result<S> {
    if c1.len() != c2.len() {
        return Err(Error::argument(
            "arrays::column_distance",
            format!("band heights {} and {} differ", c1.len() / 2, c2.len() / 2),
        ));
    }
    Ok(weighted_distance(layout, c1, c2, c1.len() / 2, None))
}

/// Band-weighted distance over rows `[lo, hi]` (all rows when `None`) of
/// columns stored with band `k`.
pub(crate) fn weighted_distance<S: Scalar>(
    layout: &PatternLayout,
    c1: &[Cell],
    c2: &[Cell],
    k: usize,
    rows: Option<(i32, i32)>,
) -> S {
    let (lo, hi) = rows.unwrap_or((-(k as i32), k as i32));
    let mut total = S::zero();
    for row in lo..=hi {
        let i = (row + k as i32) as usize;
        if c1[i] != c2[i] {
            total = total + S::pow2_neg(row.unsigned_abs()) * layout.cell_distance::<S>(c1[i], c2[i]);
        }
    }
    total
}

/// A finite rectangular piece of a point of `Λ^G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayWindow {
    layout: Arc<PatternLayout>,
    index: BoxIndex,
    band: usize,
    margin: i64,
    cells: Vec<Cell>,
}

impl ArrayWindow {
    pub fn zero(layout: Arc<PatternLayout>, lo: GroupElement, hi: GroupElement, band: usize) -> Result<Self> {
        if lo.dim() != layout.dim() {
            return Err(Error::config("arrays::window", "window and layout differ in dimension"));
        }
        let index = BoxIndex::new(lo, hi)
            .ok_or_else(|| Error::argument("arrays::window", "empty window domain"))?;
        let len = index
            .len()
            .checked_mul(2 * band + 1)
            .ok_or_else(|| Error::resource("arrays::window", "window too large"))?;
        Ok(ArrayWindow {
            layout,
            index,
            band,
            margin: 0,
            cells: vec![Cell::ZERO; len],
        })
    }

    pub fn layout(&self) -> &PatternLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> Arc<PatternLayout> {
        self.layout.clone()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn stride(&self) -> usize {
        2 * self.band + 1
    }

    pub fn lo(&self) -> GroupElement {
        self.index.lo()
    }

    pub fn hi(&self) -> GroupElement {
        self.index.hi()
    }

    pub fn index(&self) -> &BoxIndex {
        &self.index
    }

    pub fn domain(&self) -> FiniteSubset {
        FiniteSubset::cuboid(self.lo(), self.hi())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Accumulated code radius; positions closer than this to the edge are
    /// not trustworthy.
    pub fn margin(&self) -> i64 {
        self.margin
    }

    pub fn set_margin(&mut self, margin: i64) {
        self.margin = margin;
    }

    /// Positions whose margin ball stays inside the domain.
    pub fn interior(&self) -> Option<BoxIndex> {
        self.index.shrink(self.margin)
    }

    /// The interior shrunk by a further `extra`.
    pub fn interior_shrunk(&self, extra: i64) -> Option<BoxIndex> {
        self.index.shrink(self.margin + extra)
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains(g)
    }

    pub fn get(&self, g: &GroupElement, row: i32) -> Option<Cell> {
        self.index.index(g).map(|i| row_of(self.column_at(i), row))
    }

    /// Panics outside the domain.
    pub fn cell(&self, g: &GroupElement, row: i32) -> Cell {
        self.get(g, row)
            .unwrap_or_else(|| panic!("{g} outside window {}..{}", self.lo(), self.hi()))
    }

    pub fn set(&mut self, g: &GroupElement, row: i32, c: Cell) -> Result<()> {
        let i = self.index.index(g).ok_or_else(|| Error::Boundary {
            op: "arrays::set",
            msg: "write outside the window".into(),
            at: Some(g.coords().to_vec()),
        })?;
        self.set_at(i, row, c)
    }

    pub fn set_at(&mut self, i: usize, row: i32, c: Cell) -> Result<()> {
        let k = self.band as i32;
        if row.abs() > k {
            return Err(Error::argument("arrays::set", format!("row {row} outside band {k}")));
        }
        let s = self.stride();
        self.cells[i * s + (row + k) as usize] = c;
        Ok(())
    }

    pub fn column_at(&self, i: usize) -> &[Cell] {
        let s = self.stride();
        &self.cells[i * s..(i + 1) * s]
    }

    pub fn column_at_mut(&mut self, i: usize) -> &mut [Cell] {
        let s = self.stride();
        &mut self.cells[i * s..(i + 1) * s]
    }

    pub fn column(&self, g: &GroupElement) -> Option<Column> {
        self.index.index(g).map(|i| Column {
            cells: self.column_at(i).to_vec(),
        })
    }

    /// `gy` with `(gy)(h) = y(hg)`: the domain moves by `g^{-1}`.
    pub fn act(&self, g: &GroupElement) -> ArrayWindow {
        let gi = g.inv();
        let index = BoxIndex::new(self.lo().op(&gi), self.hi().op(&gi)).expect("nonempty");
        ArrayWindow {
            layout: self.layout.clone(),
            index,
            band: self.band,
            margin: self.margin,
            cells: self.cells.clone(),
        }
    }

    /// Restriction to `[lo, hi]`. The margin shrinks by the distance the crop
    /// moves inward, since any position of the crop is as trustworthy as in
    /// the source.
    pub fn crop(&self, lo: GroupElement, hi: GroupElement) -> Result<ArrayWindow> {
        if !self.contains(&lo) || !self.contains(&hi) {
            return Err(Error::Boundary {
                op: "arrays::crop",
                msg: "crop leaves the window".into(),
                at: Some(if self.contains(&lo) { hi } else { lo }.coords().to_vec()),
            });
        }
        let mut out = ArrayWindow::zero(self.layout.clone(), lo, hi, self.band)?;
        let s = self.stride();
        for i in 0..out.len() {
            let j = self.index.index_unchecked(&out.index.point(i));
            out.cells[i * s..(i + 1) * s].copy_from_slice(self.column_at(j));
        }
        let inset = (0..self.dim())
            .flat_map(|a| [lo.coord(a) - self.lo().coord(a), self.hi().coord(a) - hi.coord(a)])
            .min()
            .unwrap_or(0);
        out.margin = (self.margin - inset).max(0);
        Ok(out)
    }

    /// A copy with band `band ≥ self.band()`.
    pub fn with_band(&self, band: usize) -> ArrayWindow {
        if band == self.band {
            return self.clone();
        }
        let mut out = ArrayWindow::zero(self.layout.clone(), self.lo(), self.hi(), band).expect("same domain");
        out.margin = self.margin;
        let lift = band - self.band;
        let s_old = self.stride();
        let s_new = out.stride();
        for i in 0..self.len() {
            out.cells[i * s_new + lift..i * s_new + lift + s_old].copy_from_slice(self.column_at(i));
        }
        out
    }

    /// Largest row holding a non-Zero cell at index `i`.
    pub fn top_row(&self, i: usize) -> Option<i32> {
        let col = self.column_at(i);
        let k = self.band as i32;
        col.iter().rposition(|c| !c.is_zero()).map(|p| p as i32 - k)
    }

    /// First position in `[lo, hi]` where the two windows disagree.
    pub fn first_difference(&self, other: &ArrayWindow, lo: &GroupElement, hi: &GroupElement) -> Option<GroupElement> {
        let region = BoxIndex::new(*lo, *hi)?;
        for i in 0..region.len() {
            let g = region.point(i);
            let (Some(a), Some(b)) = (self.index.index(&g), other.index.index(&g)) else {
                return Some(g);
            };
            let (ca, cb) = (self.column_at(a), other.column_at(b));
            let same = if ca.len() == cb.len() {
                ca == cb
            } else {
                let k = self.band.max(other.band) as i32;
                (-k..=k).all(|r| row_of(ca, r) == row_of(cb, r))
            };
            if !same {
                return Some(g);
            }
        }
        None
    }

    /// Content of the point at row 0 reassembled as a base pattern.
    pub fn row_symbols(&self, row: i32) -> Vec<Option<u8>> {
        (0..self.len())
            .map(|i| row_of(self.column_at(i), row).pattern().map(|p| self.layout.center(p)))
            .collect()
    }

    pub(crate) fn cells(&self) -> &[Cell] {
        &self.cells
    }
}

/// `x̂`: row 0 at `g` holds the pattern of `x` on `B_r(g)`, every other row is
/// Zero.
pub fn hat_embed(
    x: &BasePattern,
    layout: Arc<PatternLayout>,
    lo: GroupElement,
    hi: GroupElement,
    band: usize,
) -> Result<ArrayWindow> {
    if x.alphabet() > layout.alphabet() {
        return Err(Error::argument("arrays::hat_embed", "sample alphabet exceeds the layout"));
    }
    let r = layout.radius();
    let (need_lo, need_hi) = crate::grid::shrink_bounds(&lo, &hi, -r);
    let base = x.index;
    if !base.contains(&need_lo) || !base.contains(&need_hi) {
        return Err(Error::argument(
            "arrays::hat_embed",
            format!("sample {}..{} does not cover {}..{}", base.lo(), base.hi(), need_lo, need_hi),
        ));
    }
    let mut w = ArrayWindow::zero(layout.clone(), lo, hi, band)?;
    let offsets: Vec<isize> = layout
        .offsets()
        .iter()
        .map(|u| {
            (0..u.dim())
                .map(|a| u.coord(a) as isize * base.stride(a) as isize)
                .sum()
        })
        .collect();
    let s = w.stride();
    for i in 0..w.len() {
        let center = base.index_unchecked(&w.index.point(i)) as isize;
        let code = layout.encode(offsets.iter().map(|d| x.symbols[(center + d) as usize]));
        w.cells[i * s + band] = Cell::point(code);
    }
    Ok(w)
}
