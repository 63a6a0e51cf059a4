//! Equivariant marker sets computed by a local rule.
//!
//! A position `c` is a marker when the hash of the window content on
//! `B_R(c)` is the strict maximum over `B_s(c)`; equal hashes are ordered by
//! the raw content, and identical content is a tie error. Two markers are
//! therefore more than `s` apart, so with `T^{-1}T ⊆ B_s` their
//! `T`-translates are disjoint. The rule only reads `B_{s+R}(c)` and commutes
//! with translations.

use serde::{Deserialize, Serialize};

use crate::arrays::ArrayWindow;
use crate::error::{Error, Result};
use crate::grid::{sliding_max, BoxIndex, PrefixCount};
use crate::group::GroupElement;
use crate::gsets::FiniteSubset;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkerParams {
    /// The set whose translates must be disjoint.
    pub t: FiniteSubset,
    /// Radius `R` of the hashed pattern.
    pub pattern_radius: i64,
    /// Radius `s` of the competition ball.
    pub separation: i64,
}

impl MarkerParams {
    /// `s = radius(T^{-1}T) + slack`.
    pub fn new(t: FiniteSubset, pattern_radius: i64, slack: i64) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::config("markers::params", "T is empty"));
        }
        let separation = difference_radius(&t) + slack;
        let p = MarkerParams {
            t,
            pattern_radius,
            separation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pattern_radius < 0 || self.separation < 0 {
            return Err(Error::config("markers::params", "radii must be nonnegative"));
        }
        if difference_radius(&self.t) > self.separation {
            return Err(Error::config("markers::params", "T^-1 T does not fit in B_s"));
        }
        Ok(())
    }

    /// Radius of input the decision at one position depends on.
    pub fn locality(&self) -> i64 {
        self.separation + self.pattern_radius
    }
}

/// Max-norm radius of `T^{-1}T`: the widest axis of `T`'s bounding box.
pub fn difference_radius(t: &FiniteSubset) -> i64 {
    match t.bounds() {
        Some((lo, hi)) => (0..t.dim()).map(|i| hi.coord(i) - lo.coord(i)).max().unwrap_or(0),
        None => 0,
    }
}

#[derive(Clone, Debug)]
pub struct MarkerSet {
    positions: FiniteSubset,
    region: (GroupElement, GroupElement),
    params: MarkerParams,
    syndeticity_radius: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkerStats {
    pub count: usize,
    pub region_size: usize,
    pub separation: i64,
    pub pattern_radius: i64,
    pub syndeticity_radius: Option<i64>,
}

impl MarkerSet {
    /// A marker set given explicitly, valid on `region`. Used to drive the
    /// stage codes with hand-chosen markers.
    pub fn forced(positions: FiniteSubset, region: (GroupElement, GroupElement), params: MarkerParams) -> Self {
        let mut ms = MarkerSet {
            positions,
            region,
            params,
            syndeticity_radius: None,
        };
        ms.syndeticity_radius = syndeticity_radius(&ms);
        ms
    }

    pub fn positions(&self) -> &FiniteSubset {
        &self.positions
    }

    /// Box of positions where the decision is valid.
    pub fn region(&self) -> (GroupElement, GroupElement) {
        self.region
    }

    pub fn params(&self) -> &MarkerParams {
        &self.params
    }

    /// Smallest `n` such that every `F_n g` inside the region meets the set.
    pub fn syndeticity_radius(&self) -> Option<i64> {
        self.syndeticity_radius
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn stats(&self) -> MarkerStats {
        MarkerStats {
            count: self.len(),
            region_size: FiniteSubset::cuboid(self.region.0, self.region.1).len(),
            separation: self.params.separation,
            pattern_radius: self.params.pattern_radius,
            syndeticity_radius: self.syndeticity_radius,
        }
    }

    /// A pair of members whose `T`-translates meet, if any.
    pub fn disjointness_violation(&self) -> Option<(GroupElement, GroupElement)> {
        let elems = self.positions.to_vec();
        let t = &self.params.t;
        let diff_box = t.as_cuboid().map(|(lo, hi)| {
            let w: Vec<i64> = (0..t.dim()).map(|i| hi.coord(i) - lo.coord(i)).collect();
            w
        });
        if let (Some(w), Some(base)) = (diff_box, BoxIndex::new(self.region.0, self.region.1)) {
            let mask: Vec<bool> = {
                let mut m = vec![false; base.len()];
                for g in &elems {
                    if let Some(i) = base.index(g) {
                        m[i] = true;
                    }
                }
                m
            };
            let pc = PrefixCount::from_mask(base, &mask);
            for c in &elems {
                let mut lo = *c;
                let mut hi = *c;
                for (i, wi) in w.iter().enumerate() {
                    lo = lo.with_coord(i, c.coord(i) - wi);
                    hi = hi.with_coord(i, c.coord(i) + wi);
                }
                if pc.count(&lo, &hi) > 1 {
                    let other = elems
                        .iter()
                        .find(|o| *o != c && (0..t.dim()).all(|i| (o.coord(i) - c.coord(i)).abs() <= w[i]))
                        .copied()
                        .expect("counted");
                    return Some((*c, other));
                }
            }
            return None;
        }
        let diff = t.difference_set();
        for c in &elems {
            for u in diff.iter() {
                if u.is_identity() {
                    continue;
                }
                let o = u.op(c);
                if self.positions.contains(&o) {
                    return Some((*c, o));
                }
            }
        }
        None
    }
}

const MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^= h >> 33;
    h
}

#[inline]
fn mix(h: u64, v: u64) -> u64 {
    (h ^ v).wrapping_mul(MIX).rotate_left(29)
}

fn column_hash(cells: &[crate::arrays::Cell]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3;
    for c in cells {
        h = mix(h, c.raw());
    }
    fmix64(h)
}

struct PatternReader<'a> {
    y: &'a ArrayWindow,
    deltas: Vec<isize>,
}

impl PatternReader<'_> {
    fn cmp(&self, a: usize, b: usize) -> std::cmp::Ordering {
        for d in &self.deltas {
            let ca = self.y.column_at((a as isize + d) as usize);
            let cb = self.y.column_at((b as isize + d) as usize);
            match ca.cmp(cb) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }
}

fn ball_deltas(index: &BoxIndex, dim: usize, r: i64) -> Vec<isize> {
    FiniteSubset::ball(dim, r)
        .to_vec()
        .iter()
        .map(|u| (0..dim).map(|a| u.coord(a) as isize * index.stride(a) as isize).sum())
        .collect()
}

/// `C(y)`: the local hash maxima of `y`, decided on the interior of `y`
/// shrunk by `s + R`.
pub fn markers(y: &ArrayWindow, params: &MarkerParams) -> Result<MarkerSet> {
    params.validate()?;
    if params.t.dim() != y.dim() {
        return Err(Error::config("markers::markers", "T and window differ in dimension"));
    }
    let r = params.pattern_radius;
    let s = params.separation;
    let index = *y.index();
    let keyed = y.interior_shrunk(r).ok_or_else(|| {
        Error::boundary("markers::markers", format!("window interior too small for pattern radius {r}"))
    })?;
    let region = y.interior_shrunk(r + s).ok_or_else(|| {
        Error::boundary(
            "markers::markers",
            format!("window interior too small for locality radius {}", r + s),
        )
    })?;
    let col_hash: Vec<u64> = (0..y.len()).map(|i| column_hash(y.column_at(i))).collect();
    let deltas = ball_deltas(&index, y.dim(), r);
    let mut keys = vec![0u64; y.len()];
    for kidx in 0..keyed.len() {
        let i = index.index_unchecked(&keyed.point(kidx));
        let mut h = 0x1319_8a2e_0370_7344u64;
        for d in &deltas {
            h = mix(h, col_hash[(i as isize + d) as usize]);
        }
        keys[i] = fmix64(h);
    }
    let maxima = sliding_max(&keys, &index, s as usize);
    let reader = PatternReader { y, deltas };
    let comp = ball_deltas(&index, y.dim(), s);
    let mut found = Vec::new();
    for ridx in 0..region.len() {
        let c = region.point(ridx);
        let i = index.index_unchecked(&c);
        if keys[i] != maxima[i] {
            continue;
        }
        let mut wins = true;
        for d in &comp {
            if *d == 0 {
                continue;
            }
            let j = (i as isize + d) as usize;
            if keys[j] == keys[i] {
                match reader.cmp(i, j) {
                    std::cmp::Ordering::Equal => {
                        return Err(Error::MarkerTie {
                            a: c.coords().to_vec(),
                            b: index.point(j).coords().to_vec(),
                        });
                    }
                    std::cmp::Ordering::Less => {
                        wins = false;
                        break;
                    }
                    std::cmp::Ordering::Greater => {}
                }
            }
        }
        if wins {
            found.push(c);
        }
    }
    let positions = FiniteSubset::from_elements(y.dim(), found)?;
    let mut ms = MarkerSet {
        positions,
        region: (region.lo(), region.hi()),
        params: params.clone(),
        syndeticity_radius: None,
    };
    ms.syndeticity_radius = syndeticity_radius(&ms);
    Ok(ms)
}

/// Every `F_n g ⊆ region` meets the set, with at least one such `g`.
fn syndetic_at(pc: &PrefixCount, region: &BoxIndex, n: i64) -> Option<bool> {
    let core = region.shrink(n)?;
    for i in 0..core.len() {
        let g = core.point(i);
        let (lo, hi) = crate::grid::shrink_bounds(&g, &g, -n);
        if pc.count(&lo, &hi) == 0 {
            return Some(false);
        }
    }
    Some(true)
}

fn syndeticity_radius(ms: &MarkerSet) -> Option<i64> {
    let region = BoxIndex::new(ms.region.0, ms.region.1)?;
    if ms.positions.is_empty() {
        return None;
    }
    let mut mask = vec![false; region.len()];
    for g in ms.positions.iter() {
        if let Some(i) = region.index(&g) {
            mask[i] = true;
        }
    }
    let pc = PrefixCount::from_mask(region, &mask);
    let max_n = (0..region.dim())
        .map(|a| (region.extent(a) as i64 - 1) / 2)
        .min()
        .unwrap_or(0);
    if syndetic_at(&pc, &region, 0) == Some(true) {
        return Some(0);
    }
    if max_n < 1 || syndetic_at(&pc, &region, max_n) != Some(true) {
        return None;
    }
    let (mut lo, mut hi) = (0i64, max_n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if syndetic_at(&pc, &region, mid) == Some(true) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// The smallest Følner box `F_n` with `C ∩ F_n g ≠ ∅` for every translate
/// inside the decision region, or `None` if no box fits.
pub fn syndeticity_constant(ms: &MarkerSet, y: &ArrayWindow) -> Option<FiniteSubset> {
    debug_assert_eq!(ms.positions.dim(), y.dim());
    ms.syndeticity_radius.map(|n| FiniteSubset::ball(y.dim(), n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::{hat_embed, BasePattern, PatternLayout};
    use std::sync::Arc;

    fn window(n: i64, seed: u64) -> ArrayWindow {
        let base = BasePattern::full_shift(
            GroupElement::from_slice(&[-n]),
            GroupElement::from_slice(&[n]),
            2,
            seed,
        )
        .unwrap();
        let layout = Arc::new(PatternLayout::new(1, 0, 2).unwrap());
        hat_embed(&base, layout, base.lo(), base.hi(), 1).unwrap()
    }

    #[test]
    fn markers_are_separated_and_syndetic() {
        let y = window(2000, 7);
        let p = MarkerParams::new(FiniteSubset::ball(1, 3), 12, 2).unwrap();
        assert_eq!(p.separation, 8);
        let ms = markers(&y, &p).unwrap();
        assert!(ms.len() > 50);
        assert!(ms.disjointness_violation().is_none());
        let mut v = ms.positions().to_vec();
        v.sort_by_key(|g| g.coord(0));
        for w in v.windows(2) {
            assert!(w[1].coord(0) - w[0].coord(0) > 8, "{:?}", w);
        }
        let n = ms.syndeticity_radius().unwrap();
        let f = syndeticity_constant(&ms, &y).unwrap();
        assert_eq!(f.len() as i64, 2 * n + 1);
        // every gap between consecutive markers is below 2n+2
        for w in v.windows(2) {
            assert!(w[1].coord(0) - w[0].coord(0) <= 2 * n + 1);
        }
    }

    #[test]
    fn constant_point_ties() {
        let base = BasePattern::periodic(
            GroupElement::from_slice(&[-100]),
            GroupElement::from_slice(&[100]),
            2,
            &[1],
        )
        .unwrap();
        let layout = Arc::new(PatternLayout::new(1, 0, 2).unwrap());
        let y = hat_embed(&base, layout, base.lo(), base.hi(), 1).unwrap();
        let p = MarkerParams::new(FiniteSubset::identity(1), 4, 1).unwrap();
        assert!(matches!(markers(&y, &p), Err(Error::MarkerTie { .. })));
    }

    #[test]
    fn empty_marker_set_has_no_constant() {
        let y = window(50, 1);
        let p = MarkerParams::new(FiniteSubset::identity(1), 12, 1).unwrap();
        let ms = markers(&y, &p).unwrap();
        let empty = MarkerSet {
            positions: FiniteSubset::empty(1),
            ..ms
        };
        assert_eq!(syndeticity_radius(&empty), None);
    }
}
