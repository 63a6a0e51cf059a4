//! Lower Banach density `D_F(S) = inf_g |S ∩ Fg| / |F|` and syndeticity.
//!
//! Periodic sets are evaluated exactly over one fundamental domain. Explicit
//! sets are only known on a window; the infimum then runs over the window
//! core `{g : Fg ⊆ window}` and is an upper bound for the true value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoxIndex, PrefixCount};
use crate::group::GroupElement;
use crate::gsets::{CuboidIter, FiniteSubset};
use crate::lemmas::invariance_core;
use crate::markers::MarkerSet;
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetSpec {
    /// A set known only on `window`.
    Explicit {
        set: FiniteSubset,
        window: FiniteSubset,
    },
    /// `{g : g mod periods ∈ residues}` for the diagonal lattice
    /// `p_1 Z × … × p_d Z`.
    Periodic {
        periods: Vec<i64>,
        residues: Vec<Vec<i64>>,
    },
}

impl SubsetSpec {
    pub fn full(dim: usize) -> Self {
        SubsetSpec::Periodic {
            periods: vec![1; dim],
            residues: vec![vec![0; dim]],
        }
    }

    pub fn empty(dim: usize) -> Self {
        SubsetSpec::Periodic {
            periods: vec![1; dim],
            residues: Vec::new(),
        }
    }

    /// `p Z` in dimension one.
    pub fn multiples(p: i64) -> Self {
        SubsetSpec::Periodic {
            periods: vec![p],
            residues: vec![vec![0]],
        }
    }

    /// A marker set, measured on the region where its decisions are valid.
    pub fn from_markers(ms: &MarkerSet) -> Self {
        let (lo, hi) = ms.region();
        SubsetSpec::Explicit {
            set: ms.positions().clone(),
            window: FiniteSubset::cuboid(lo, hi),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SubsetSpec::Explicit { window, .. } => window.dim(),
            SubsetSpec::Periodic { periods, .. } => periods.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SubsetSpec::Explicit { set, window } => {
                if set.dim() != window.dim() {
                    return Err(Error::config("density::spec", "set and window differ in dimension"));
                }
            }
            SubsetSpec::Periodic { periods, residues } => {
                if periods.is_empty() || periods.iter().any(|&p| p < 1) {
                    return Err(Error::config(
                        "density::spec",
                        "periods must be positive, one per axis",
                    ));
                }
                let mut seen = std::collections::HashSet::new();
                for r in residues {
                    if r.len() != periods.len() {
                        return Err(Error::config("density::spec", "residue of wrong dimension"));
                    }
                    let reduced: Vec<i64> =
                        r.iter().zip(periods).map(|(x, p)| x.rem_euclid(*p)).collect();
                    if !seen.insert(reduced) {
                        return Err(Error::config("density::spec", "residues not distinct"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            SubsetSpec::Explicit { set, .. } => set.contains(g),
            SubsetSpec::Periodic { periods, residues } => residues.iter().any(|r| {
                r.iter()
                    .zip(periods)
                    .enumerate()
                    .all(|(i, (x, p))| g.coord(i).rem_euclid(*p) == x.rem_euclid(*p))
            }),
        }
    }

    /// Minimum and number of evaluated translates of `|S ∩ Fg|`.
    fn min_count(&self, f: &FiniteSubset) -> Result<(usize, usize)> {
        if f.is_empty() {
            return Err(Error::argument("density::d_f", "F is empty"));
        }
        match self {
            SubsetSpec::Periodic { periods, .. } => {
                let dim = periods.len();
                let lo = GroupElement::identity(dim);
                let hi = GroupElement::from_slice(&periods.iter().map(|p| p - 1).collect::<Vec<_>>());
                let elems: Vec<_> = f.iter().collect();
                let mut best = usize::MAX;
                let mut n = 0;
                for g in CuboidIter::new(lo, hi) {
                    let c = elems.iter().filter(|x| self.contains(&x.op(&g))).count();
                    best = best.min(c);
                    n += 1;
                }
                Ok((best, n))
            }
            SubsetSpec::Explicit { set, window } => {
                if let (Some((wlo, whi)), Some((flo, fhi))) = (window.as_cuboid(), f.as_cuboid()) {
                    return explicit_box_min(set, wlo, whi, flo, fhi);
                }
                let core = invariance_core(window, f);
                if core.is_empty() {
                    return Err(Error::argument(
                        "density::d_f",
                        "window too small to contain any translate of F",
                    ));
                }
                let elems: Vec<_> = f.iter().collect();
                let mut best = usize::MAX;
                for g in core.iter() {
                    let c = elems.iter().filter(|x| set.contains(&x.op(&g))).count();
                    best = best.min(c);
                }
                Ok((best, core.len()))
            }
        }
    }
}

fn explicit_box_min(
    set: &FiniteSubset,
    wlo: GroupElement,
    whi: GroupElement,
    flo: GroupElement,
    fhi: GroupElement,
) -> Result<(usize, usize)> {
    let base = BoxIndex::new(wlo, whi).expect("nonempty window");
    let mut mask = vec![0u64; base.len()];
    for g in set.iter() {
        if let Some(i) = base.index(&g) {
            mask[i] = 1;
        }
    }
    let pc = PrefixCount::new(base, |i| mask[i]);
    let dim = wlo.dim();
    let mut clo = wlo;
    let mut chi = whi;
    for i in 0..dim {
        clo = clo.with_coord(i, wlo.coord(i) - flo.coord(i));
        chi = chi.with_coord(i, whi.coord(i) - fhi.coord(i));
    }
    let core = BoxIndex::new(clo, chi).ok_or_else(|| {
        Error::argument("density::d_f", "window too small to contain any translate of F")
    })?;
    let mut best = u64::MAX;
    for idx in 0..core.len() {
        let g = core.point(idx);
        best = best.min(pc.count(&flo.op(&g), &fhi.op(&g)));
        if best == 0 {
            break;
        }
    }
    Ok((best as usize, core.len()))
}

/// `D_F(S)`: exact for periodic `S`, the window-core infimum otherwise.
pub fn d_f<S: Scalar>(spec: &SubsetSpec, f: &FiniteSubset) -> Result<S> {
    let (min, _) = spec.min_count(f)?;
    Ok(S::ratio(min, f.len()))
}

/// `S ∩ Fg ≠ ∅` for every evaluated translate.
pub fn is_syndetic(spec: &SubsetSpec, f: &FiniteSubset) -> Result<bool> {
    Ok(spec.min_count(f)?.0 > 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow<S> {
    pub n: i64,
    pub size: usize,
    pub value: S,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityTable<S> {
    pub rows: Vec<DensityRow<S>>,
    /// `D_{F_n}(S)` at the largest evaluated `n`.
    pub value: S,
}

/// `D_{F_n}(S)` for `n = 1..=max_n`. For explicit sets the table ends at the
/// last `n` whose box still fits the window.
pub fn lower_banach_density<S: Scalar + Serialize>(
    spec: &SubsetSpec,
    max_n: i64,
) -> Result<DensityTable<S>> {
    if max_n < 1 {
        return Err(Error::argument("density::lower_banach_density", "max_n must be ≥ 1"));
    }
    let dim = spec.dim();
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let f = FiniteSubset::ball(dim, n);
        match d_f::<S>(spec, &f) {
            Ok(v) => rows.push(DensityRow {
                n,
                size: f.len(),
                value: v,
            }),
            Err(e) if rows.is_empty() => return Err(e),
            Err(_) => break,
        }
    }
    let value = rows.last().map(|r| r.value).expect("at least one row");
    Ok(DensityTable { rows, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    #[test]
    fn periodic_examples() {
        let two = SubsetSpec::multiples(2);
        let f01 = FiniteSubset::from_coords(1, &[&[0], &[1]]).unwrap();
        assert_eq!(d_f::<Exact>(&two, &f01).unwrap(), Exact::new(1, 2));
        let three = SubsetSpec::multiples(3);
        let f012 = FiniteSubset::from_coords(1, &[&[0], &[1], &[2]]).unwrap();
        assert_eq!(d_f::<Exact>(&three, &f012).unwrap(), Exact::new(1, 3));
        assert_eq!(d_f::<Exact>(&SubsetSpec::full(1), &f012).unwrap(), Exact::new(1, 1));
        assert!(is_syndetic(&two, &f01).unwrap());
        assert!(is_syndetic(&SubsetSpec::full(2), &FiniteSubset::identity(2)).unwrap());
    }

    #[test]
    fn banach_density_table() {
        let t = lower_banach_density::<Exact>(&SubsetSpec::multiples(2), 10).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert_eq!(t.value, Exact::new(10, 21));
        assert_eq!(lower_banach_density::<Exact>(&SubsetSpec::empty(1), 5).unwrap().value, Exact::new(0, 1));
        assert_eq!(lower_banach_density::<f64>(&SubsetSpec::full(1), 5).unwrap().value, 1.0);
    }

    #[test]
    fn half_line_is_not_syndetic() {
        let window = FiniteSubset::ball(1, 200);
        let set = FiniteSubset::cuboid(GroupElement::from_slice(&[0]), GroupElement::from_slice(&[200]));
        let spec = SubsetSpec::Explicit { set, window };
        for n in [1, 5, 20] {
            assert!(!is_syndetic(&spec, &FiniteSubset::ball(1, n)).unwrap());
        }
    }

    #[test]
    fn explicit_paths_agree() {
        let window = FiniteSubset::ball(1, 40);
        let set = FiniteSubset::from_elements(
            1,
            (-40..=40).filter(|x| x % 3 == 0).map(|x| GroupElement::from_slice(&[x])),
        )
        .unwrap();
        let spec = SubsetSpec::Explicit { set, window };
        let f = FiniteSubset::ball(1, 2);
        let fast = d_f::<Exact>(&spec, &f).unwrap();
        let slow = d_f::<Exact>(&spec, &f.to_explicit()).unwrap();
        assert_eq!(fast, Exact::new(1, 5));
        assert_eq!(slow, fast);
    }

    #[test]
    fn window_growth_never_raises_value() {
        let set = FiniteSubset::from_elements(
            1,
            (-300i64..=300).filter(|x| (x * x) % 7 < 3).map(|x| GroupElement::from_slice(&[x])),
        )
        .unwrap();
        let f = FiniteSubset::ball(1, 3);
        let mut prev = Exact::new(1, 1);
        for r in [20, 60, 150, 300] {
            let spec = SubsetSpec::Explicit {
                set: set.intersection(&FiniteSubset::ball(1, r)),
                window: FiniteSubset::ball(1, r),
            };
            let v = d_f::<Exact>(&spec, &f).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn too_small_window_is_an_error() {
        let spec = SubsetSpec::Explicit {
            set: FiniteSubset::ball(1, 1),
            window: FiniteSubset::ball(1, 1),
        };
        assert!(d_f::<f64>(&spec, &FiniteSubset::ball(1, 3)).is_err());
    }

    #[test]
    fn sup_over_f_is_attained_on_small_boxes_for_periodic_sets() {
        let spec = SubsetSpec::multiples(3);
        let vals: Vec<Exact> = (1..=10)
            .map(|n| d_f::<Exact>(&spec, &FiniteSubset::ball(1, n)).unwrap())
            .collect();
        let sup = vals.iter().copied().fold(Exact::new(0, 1), |a, b| a.max(b));
        assert_eq!(sup, Exact::new(1, 3));
        assert!(vals.iter().all(|&v| v > Exact::new(0, 1)));
    }
}
