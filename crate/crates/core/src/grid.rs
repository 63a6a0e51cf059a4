//! Dense indexing of boxes in `Z^d`, summed-area tables and separable sliding
//! maxima. These back every translate scan that would otherwise be quadratic.

use std::collections::VecDeque;

use crate::group::{GroupElement, MAX_DIM};

/// Row-major indexing of a nonempty box, last axis fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxIndex {
    lo: GroupElement,
    hi: GroupElement,
    extent: [usize; MAX_DIM],
    stride: [usize; MAX_DIM],
    len: usize,
}

impl BoxIndex {
    /// `None` when the box is empty.
    pub fn new(lo: GroupElement, hi: GroupElement) -> Option<Self> {
        let dim = lo.dim();
        let mut extent = [1usize; MAX_DIM];
        for (i, e) in extent.iter_mut().enumerate().take(dim) {
            let w = hi.coord(i) - lo.coord(i) + 1;
            if w <= 0 {
                return None;
            }
            *e = w as usize;
        }
        let mut stride = [0usize; MAX_DIM];
        let mut acc = 1usize;
        for i in (0..dim).rev() {
            stride[i] = acc;
            acc = acc.checked_mul(extent[i])?;
        }
        Some(BoxIndex {
            lo,
            hi,
            extent,
            stride,
            len: acc,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> GroupElement {
        self.lo
    }

    pub fn hi(&self) -> GroupElement {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.extent[axis]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.stride[axis]
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        (0..self.dim()).all(|i| self.lo.coord(i) <= g.coord(i) && g.coord(i) <= self.hi.coord(i))
    }

    pub fn index(&self, g: &GroupElement) -> Option<usize> {
        if self.contains(g) {
            Some(self.index_unchecked(g))
        } else {
            None
        }
    }

    #[inline]
    pub fn index_unchecked(&self, g: &GroupElement) -> usize {
        let mut idx = 0;
        for i in 0..self.dim() {
            idx += (g.coord(i) - self.lo.coord(i)) as usize * self.stride[i];
        }
        idx
    }

    pub fn point(&self, mut idx: usize) -> GroupElement {
        let mut g = self.lo;
        for i in 0..self.dim() {
            let q = idx / self.stride[i];
            idx %= self.stride[i];
            g = g.with_coord(i, self.lo.coord(i) + q as i64);
        }
        g
    }

    /// The box shrunk by `n` on every side.
    pub fn shrink(&self, n: i64) -> Option<BoxIndex> {
        let (lo, hi) = shrink_bounds(&self.lo, &self.hi, n);
        BoxIndex::new(lo, hi)
    }

    /// Intersection with another box.
    pub fn clip(&self, lo: &GroupElement, hi: &GroupElement) -> Option<BoxIndex> {
        let mut a = self.lo;
        let mut b = self.hi;
        for i in 0..self.dim() {
            a = a.with_coord(i, a.coord(i).max(lo.coord(i)));
            b = b.with_coord(i, b.coord(i).min(hi.coord(i)));
        }
        BoxIndex::new(a, b)
    }
}

/// `[lo + n, hi - n]`, possibly empty.
pub fn shrink_bounds(lo: &GroupElement, hi: &GroupElement, n: i64) -> (GroupElement, GroupElement) {
    let mut a = *lo;
    let mut b = *hi;
    for i in 0..lo.dim() {
        a = a.with_coord(i, lo.coord(i) + n);
        b = b.with_coord(i, hi.coord(i) - n);
    }
    (a, b)
}

/// Summed-area table of nonnegative counts over a box.
#[derive(Clone, Debug)]
pub struct PrefixCount {
    base: BoxIndex,
    outer: BoxIndex,
    sums: Vec<u64>,
}

impl PrefixCount {
    /// `values[i]` is the count at `base.point(i)`.
    pub fn new(base: BoxIndex, values: impl Fn(usize) -> u64) -> Self {
        let dim = base.dim();
        let mut hi = base.hi;
        for i in 0..dim {
            hi = hi.with_coord(i, base.hi.coord(i) + 1);
        }
        let outer = BoxIndex::new(base.lo, hi).expect("nonempty");
        let mut sums = vec![0u64; outer.len()];
        for idx in 0..base.len() {
            let v = values(idx);
            if v != 0 {
                let mut g = base.point(idx);
                for i in 0..dim {
                    g = g.with_coord(i, g.coord(i) + 1);
                }
                sums[outer.index_unchecked(&g)] = v;
            }
        }
        for axis in 0..dim {
            let stride = outer.stride(axis);
            let extent = outer.extent(axis);
            for idx in 0..sums.len() {
                let pos = (idx / stride) % extent;
                if pos > 0 {
                    sums[idx] += sums[idx - stride];
                }
            }
        }
        PrefixCount { base, outer, sums }
    }

    pub fn from_mask(base: BoxIndex, mask: &[bool]) -> Self {
        Self::new(base, |i| mask[i] as u64)
    }

    pub fn base(&self) -> &BoxIndex {
        &self.base
    }

    /// Total count over the box `[lo, hi]`, clipped to the table.
    pub fn count(&self, lo: &GroupElement, hi: &GroupElement) -> u64 {
        let dim = self.base.dim();
        let mut a = [0usize; MAX_DIM];
        let mut b = [0usize; MAX_DIM];
        for i in 0..dim {
            let l = lo.coord(i).max(self.base.lo.coord(i));
            let h = hi.coord(i).min(self.base.hi.coord(i));
            if l > h {
                return 0;
            }
            a[i] = (l - self.base.lo.coord(i)) as usize;
            b[i] = (h - self.base.lo.coord(i)) as usize + 1;
        }
        let mut total: i128 = 0;
        for mask in 0u32..(1 << dim) {
            let mut idx = 0usize;
            let mut sign = 1i128;
            for i in 0..dim {
                if mask & (1 << i) != 0 {
                    idx += a[i] * self.outer.stride(i);
                    sign = -sign;
                } else {
                    idx += b[i] * self.outer.stride(i);
                }
            }
            total += sign * self.sums[idx] as i128;
        }
        total as u64
    }
}

/// Maximum of `values` over the box of radius `radius` around each index of
/// `index`, with the box clipped at the edges.
pub fn sliding_max(values: &[u64], index: &BoxIndex, radius: usize) -> Vec<u64> {
    let mut cur = values.to_vec();
    let mut next = vec![0u64; cur.len()];
    let mut deque: VecDeque<(usize, u64)> = VecDeque::new();
    for axis in 0..index.dim() {
        let stride = index.stride(axis);
        let extent = index.extent(axis);
        for start in 0..cur.len() {
            if !(start / stride).is_multiple_of(extent) {
                continue;
            }
            deque.clear();
            let at = |p: usize| start + p * stride;
            let mut pushed = 0usize;
            for p in 0..extent {
                let want = (p + radius).min(extent - 1);
                while pushed <= want {
                    let v = cur[at(pushed)];
                    while matches!(deque.back(), Some(&(_, b)) if b <= v) {
                        deque.pop_back();
                    }
                    deque.push_back((pushed, v));
                    pushed += 1;
                }
                while let Some(&(q, _)) = deque.front() {
                    if q + radius < p {
                        deque.pop_front();
                    } else {
                        break;
                    }
                }
                next[at(p)] = deque.front().map(|&(_, v)| v).unwrap_or(0);
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(c: &[i64]) -> GroupElement {
        GroupElement::from_slice(c)
    }

    #[test]
    fn index_roundtrip() {
        let b = BoxIndex::new(g(&[-2, 3]), g(&[1, 5])).unwrap();
        assert_eq!(b.len(), 12);
        for i in 0..b.len() {
            assert_eq!(b.index(&b.point(i)), Some(i));
        }
        assert!(BoxIndex::new(g(&[0]), g(&[-1])).is_none());
    }

    #[test]
    fn prefix_counts_match_brute_force() {
        let b = BoxIndex::new(g(&[-3, -2]), g(&[4, 3])).unwrap();
        let vals: Vec<u64> = (0..b.len()).map(|i| ((i * 7919) % 5) as u64).collect();
        let pc = PrefixCount::new(b, |i| vals[i]);
        for (lo, hi) in [([-3, -2], [4, 3]), ([0, 0], [0, 0]), ([-1, -5], [2, 1]), ([5, 0], [6, 1])] {
            let (lo, hi) = (g(&lo), g(&hi));
            let brute: u64 = (0..b.len())
                .filter(|&i| {
                    let p = b.point(i);
                    (0..2).all(|a| lo.coord(a) <= p.coord(a) && p.coord(a) <= hi.coord(a))
                })
                .map(|i| vals[i])
                .sum();
            assert_eq!(pc.count(&lo, &hi), brute);
        }
    }

    #[test]
    fn sliding_max_matches_brute_force() {
        let b = BoxIndex::new(g(&[0, 0]), g(&[6, 9])).unwrap();
        let vals: Vec<u64> = (0..b.len()).map(|i| ((i as u64) * 2654435761) % 101).collect();
        for r in 0..4usize {
            let m = sliding_max(&vals, &b, r);
            for i in 0..b.len() {
                let p = b.point(i);
                let brute = (0..b.len())
                    .filter(|&j| {
                        let q = p.div(&b.point(j));
                        q.norm_max() <= r as i64
                    })
                    .map(|j| vals[j])
                    .max()
                    .unwrap();
                assert_eq!(m[i], brute);
            }
        }
    }
}
