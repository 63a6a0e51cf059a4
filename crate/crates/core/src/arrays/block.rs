//! Blocks, occurrence search and ε-dense families.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::cell::{Cell, PatternLayout};
use super::window::{weighted_distance, ArrayWindow};
use crate::error::{Error, Result};
use crate::grid::BoxIndex;
use crate::group::GroupElement;
use crate::gsets::FiniteSubset;
use crate::scalar::Scalar;

/// Distance between blocks on different domains; exceeds the largest
/// possible column distance `Σ 2^{-|n|} < 3`.
pub const DOMAIN_MISMATCH_DISTANCE: u32 = 3;

/// A map from a finite domain to columns, restricted to rows `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BlockRepr", into = "BlockRepr")]
pub struct Block {
    offsets: Vec<GroupElement>,
    rows: (i32, i32),
    cells: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
struct BlockRepr {
    offsets: Vec<GroupElement>,
    rows: (i32, i32),
    cells: Vec<u64>,
}

impl From<Block> for BlockRepr {
    fn from(b: Block) -> Self {
        BlockRepr {
            offsets: b.offsets,
            rows: b.rows,
            cells: b.cells.into_iter().map(Cell::raw).collect(),
        }
    }
}

impl TryFrom<BlockRepr> for Block {
    type Error = String;

    fn try_from(r: BlockRepr) -> std::result::Result<Self, String> {
        let height = (r.rows.1 - r.rows.0 + 1).max(0) as usize;
        if r.cells.len() != r.offsets.len() * height {
            return Err("cell count does not match domain and rows".into());
        }
        if !r.offsets.windows(2).all(|w| w[0] < w[1]) {
            return Err("block offsets are not in canonical order".into());
        }
        Ok(Block {
            offsets: r.offsets,
            rows: r.rows,
            cells: r.cells.into_iter().map(Cell::from_raw).collect(),
        })
    }
}

impl Block {
    /// `cells` lists, per offset in canonical order, rows `lo..=hi`.
    pub fn new(domain: &FiniteSubset, rows: (i32, i32), cells: Vec<Cell>) -> Result<Block> {
        let offsets = domain.to_vec();
        let height = (rows.1 - rows.0 + 1).max(0) as usize;
        if cells.len() != offsets.len() * height {
            return Err(Error::argument("arrays::block", "cell count does not match domain and rows"));
        }
        Ok(Block {
            offsets,
            rows,
            cells,
        })
    }

    /// `y` restricted to `domain·g`, rows `rows`.
    pub fn extract(y: &ArrayWindow, domain: &FiniteSubset, rows: (i32, i32), g: &GroupElement) -> Result<Block> {
        let k = y.band() as i32;
        if rows.0 < -k || rows.1 > k || rows.0 > rows.1 {
            return Err(Error::argument("arrays::block", format!("rows {rows:?} outside band {k}")));
        }
        let offsets = domain.to_vec();
        let mut cells = Vec::with_capacity(offsets.len() * (rows.1 - rows.0 + 1) as usize);
        for u in &offsets {
            let p = u.op(g);
            let i = y.index().index(&p).ok_or_else(|| Error::Boundary {
                op: "arrays::block",
                msg: "block leaves the window".into(),
                at: Some(p.coords().to_vec()),
            })?;
            let col = y.column_at(i);
            for r in rows.0..=rows.1 {
                cells.push(col[(r + k) as usize]);
            }
        }
        Ok(Block {
            offsets,
            rows,
            cells,
        })
    }

    pub fn domain(&self) -> FiniteSubset {
        FiniteSubset::from_elements(self.offsets.first().map(|g| g.dim()).unwrap_or(1), self.offsets.iter().copied())
            .expect("same dimension")
    }

    pub fn offsets(&self) -> &[GroupElement] {
        &self.offsets
    }

    pub fn rows(&self) -> (i32, i32) {
        self.rows
    }

    pub fn height(&self) -> usize {
        (self.rows.1 - self.rows.0 + 1) as usize
    }

    /// Cells of the column at offset index `i`, rows `lo..=hi`.
    pub fn column(&self, i: usize) -> &[Cell] {
        let h = self.height();
        &self.cells[i * h..(i + 1) * h]
    }

    pub fn cell(&self, offset: &GroupElement, row: i32) -> Option<Cell> {
        if row < self.rows.0 || row > self.rows.1 {
            return None;
        }
        let i = self.offsets.binary_search(offset).ok()?;
        Some(self.column(i)[(row - self.rows.0) as usize])
    }

    /// Exact match of `self` at `g` in `y`.
    pub fn occurs_at(&self, y: &ArrayWindow, g: &GroupElement) -> bool {
        let k = y.band() as i32;
        self.offsets.iter().enumerate().all(|(i, u)| match y.index().index(&u.op(g)) {
            Some(j) => {
                let col = y.column_at(j);
                let lo = (self.rows.0 + k) as usize;
                col[lo..lo + self.height()] == *self.column(i)
            }
            None => false,
        })
    }
}

/// `sup_f d_Λ(B1(f), B2(f))` over the common domain, or the mismatch constant
/// when domains or row spans differ.
pub fn block_distance<S: Scalar>(layout: &PatternLayout, b1: &Block, b2: &Block) -> S {
    if b1.offsets != b2.offsets || b1.rows != b2.rows {
        return S::from_count(DOMAIN_MISMATCH_DISTANCE as usize);
    }
    let h = b1.height();
    let k = b1.rows.0.unsigned_abs().max(b1.rows.1.unsigned_abs()) as usize;
    let mut best = S::zero();
    let mut a = vec![Cell::ZERO; 2 * k + 1];
    let mut b = vec![Cell::ZERO; 2 * k + 1];
    for i in 0..b1.offsets.len() {
        let (c1, c2) = (b1.column(i), b2.column(i));
        if c1 == c2 {
            continue;
        }
        for r in 0..h {
            let slot = (b1.rows.0 + r as i32 + k as i32) as usize;
            a[slot] = c1[r];
            b[slot] = c2[r];
        }
        let d: S = weighted_distance(layout, &a, &b, k, Some(b1.rows));
        best = best.max_of(d);
    }
    best
}

/// Offsets `u ↦ idx(ug) - idx(g)` in `y`'s flat layout and the relative bounds
/// of the domain.
struct Stencil {
    deltas: Vec<isize>,
    lo: GroupElement,
    hi: GroupElement,
}

impl Stencil {
    fn new(block: &Block, index: &BoxIndex) -> Option<Stencil> {
        let dom = block.domain();
        let (lo, hi) = dom.bounds()?;
        let deltas = block
            .offsets
            .iter()
            .map(|u| (0..u.dim()).map(|a| u.coord(a) as isize * index.stride(a) as isize).sum())
            .collect();
        Some(Stencil { deltas, lo, hi })
    }
}

/// Positions `g` in `y` with `domain(B)·g ⊆ domain(y)` and
/// `sup_f d_Λ(y(fg), B(f)) ≤ tol`, in canonical order.
pub fn find_occurrences<S: Scalar>(block: &Block, y: &ArrayWindow, tol: S) -> Vec<GroupElement> {
    find_occurrences_in(block, y, &y.lo(), &y.hi(), tol)
}

/// As [`find_occurrences`], for positions `g` in the box `[lo, hi]`.
pub fn find_occurrences_in<S: Scalar>(
    block: &Block,
    y: &ArrayWindow,
    lo: &GroupElement,
    hi: &GroupElement,
    tol: S,
) -> Vec<GroupElement> {
    let mut out: Vec<GroupElement> = occurrence_indices(block, y, lo, hi, tol)
        .into_iter()
        .map(|i| y.index().point(i))
        .collect();
    out.sort_unstable();
    out
}

/// Flat indices (in `y`) of occurrence positions, in index order.
pub(crate) fn occurrence_indices<S: Scalar>(
    block: &Block,
    y: &ArrayWindow,
    lo: &GroupElement,
    hi: &GroupElement,
    tol: S,
) -> Vec<usize> {
    let index = y.index();
    let Some(st) = Stencil::new(block, index) else {
        return Vec::new();
    };
    let k = y.band() as i32;
    if block.rows.0 < -k || block.rows.1 > k {
        return Vec::new();
    }
    // Positions keeping the whole domain inside y.
    let mut plo = *lo;
    let mut phi = *hi;
    for a in 0..y.dim() {
        plo = plo.with_coord(a, plo.coord(a).max(y.lo().coord(a) - st.lo.coord(a)));
        phi = phi.with_coord(a, phi.coord(a).min(y.hi().coord(a) - st.hi.coord(a)));
    }
    let Some(region) = BoxIndex::new(plo, phi) else {
        return Vec::new();
    };
    let stride = y.stride();
    let first_row = (block.rows.0 + k) as usize;
    let h = block.height();
    let cells = y.cells();
    let exact = tol == S::zero();
    let layout = y.layout();
    let mut out = Vec::new();
    let mut buf_a = vec![Cell::ZERO; stride];
    let mut buf_b = vec![Cell::ZERO; stride];
    for r in 0..region.len() {
        let g = region.point(r);
        let base = index.index_unchecked(&g) as isize;
        let mut ok = true;
        for (i, d) in st.deltas.iter().enumerate() {
            let j = (base + d) as usize;
            let start = j * stride + first_row;
            let got = &cells[start..start + h];
            let want = block.column(i);
            if got == want {
                continue;
            }
            if exact {
                ok = false;
                break;
            }
            buf_a.fill(Cell::ZERO);
            buf_b.fill(Cell::ZERO);
            buf_a[first_row..first_row + h].copy_from_slice(got);
            buf_b[first_row..first_row + h].copy_from_slice(want);
            let dist: S = weighted_distance(layout, &buf_a, &buf_b, k as usize, Some(block.rows));
            if dist > tol {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(base as usize);
        }
    }
    out
}

/// A family member with the sample and position where it was first seen.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyMember {
    #[serde(skip)]
    pub block: Block,
    pub sample: usize,
    pub origin: GroupElement,
}

/// Greedy first-fit ε-net of the blocks with domain `domain` (rows `rows`)
/// occurring in the interiors of `samples`. Samples are scanned in order,
/// positions in canonical order; `regions[i]`, when given, restricts the
/// positions scanned in sample `i`.
pub fn eps_dense_family<S: Scalar>(
    samples: &[ArrayWindow],
    domain: &FiniteSubset,
    rows: (i32, i32),
    eps: S,
    regions: &[Option<(GroupElement, GroupElement)>],
) -> Result<Vec<FamilyMember>> {
    if !(eps > S::zero()) {
        return Err(Error::argument("arrays::eps_dense_family", "ε must be positive"));
    }
    if samples.is_empty() {
        return Err(Error::argument("arrays::eps_dense_family", "no samples"));
    }
    let (dlo, dhi) = domain
        .bounds()
        .ok_or_else(|| Error::argument("arrays::eps_dense_family", "empty domain"))?;
    let mut members: Vec<FamilyMember> = Vec::new();
    let mut seen: HashSet<Block> = HashSet::new();
    // A disagreement on a row with 2^{-|n|-r} > ε already exceeds ε, so
    // members are bucketed by their content on those rows.
    let r = samples[0].layout().radius() as u32;
    let heavy: Vec<usize> = (rows.0..=rows.1)
        .enumerate()
        .filter(|&(_, n)| S::pow2_neg(n.unsigned_abs() + r) > eps)
        .map(|(i, _)| i)
        .collect();
    let mut buckets: HashMap<Vec<Cell>, Vec<usize>> = HashMap::new();
    for (si, y) in samples.iter().enumerate() {
        let Some(interior) = y.interior() else { continue };
        let mut lo = interior.lo();
        let mut hi = interior.hi();
        for a in 0..y.dim() {
            lo = lo.with_coord(a, lo.coord(a) - dlo.coord(a));
            hi = hi.with_coord(a, hi.coord(a) - dhi.coord(a));
        }
        let mut pos = match BoxIndex::new(lo, hi) {
            Some(b) => b,
            None => continue,
        };
        if let Some(Some((rlo, rhi))) = regions.get(si) {
            match pos.clip(rlo, rhi) {
                Some(b) => pos = b,
                None => continue,
            }
        }
        let mut order: Vec<GroupElement> = (0..pos.len()).map(|i| pos.point(i)).collect();
        order.sort_unstable();
        for g in order {
            let b = Block::extract(y, domain, rows, &g)?;
            if seen.contains(&b) {
                continue;
            }
            let key: Vec<Cell> = (0..b.offsets.len())
                .flat_map(|i| heavy.iter().map(move |&h| (i, h)))
                .map(|(i, h)| b.column(i)[h])
                .collect();
            let bucket = buckets.entry(key).or_default();
            let covered = bucket
                .iter()
                .any(|&m| block_distance::<S>(y.layout(), &members[m].block, &b) <= eps);
            seen.insert(b.clone());
            if !covered {
                bucket.push(members.len());
                members.push(FamilyMember {
                    block: b,
                    sample: si,
                    origin: g,
                });
            }
        }
    }
    Ok(members)
}
