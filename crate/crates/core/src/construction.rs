//! The stage codes `Ψ_s`, their composition and base-point recovery.
//!
//! Stage `s` reads a stage-`(s-1)` window. Primary markers `C` (for `F_m`)
//! pick sites; around each marker `c` the first `N_s` secondary markers
//! `d ∈ F_m c` (for `H_{s-1}^{-1} T̄`) receive the family members
//! `B_1, …, B_{N_s}` on rows `-(s-1)..=s-1`. Row `-s` records the site
//! (Star at `d`, One on the rest of `T_{s-1} d`) and row `s` archives the
//! former top cell, so the base point survives every stage.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arrays::{eps_dense_family, find_occurrences, ArrayWindow, BasePattern, Block, Cell, CellKind};
use crate::error::{Error, Result};
use crate::gsets::{in_box, FiniteSubset};
use crate::group::GroupElement;
use crate::lemmas::collar_window_set;
use crate::markers::{markers, MarkerParams, MarkerSet, MarkerStats};
use crate::scalar::Scalar;

/// Parameters shared by all stages.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageParams<S> {
    /// `ε_1, …, ε_K`.
    pub epsilons: Vec<S>,
    /// Radius of the base patterns stored in a point cell.
    pub r: i64,
    /// Pattern radius `R` of both marker rules.
    pub pattern_radius: i64,
    /// Extra competition radius on top of `radius(T^{-1}T)`.
    pub slack: i64,
    /// Library occurrences tried per completion.
    pub search_budget: usize,
    /// Per stage, restricts family candidates to a box of this radius around
    /// each sample's centre.
    #[serde(default)]
    pub family_radius: Vec<Option<i64>>,
}

impl<S: Scalar> StageParams<S> {
    pub fn new(epsilons: Vec<S>) -> Self {
        StageParams {
            epsilons,
            r: 0,
            pattern_radius: 16,
            slack: 0,
            search_budget: 64,
            family_radius: Vec::new(),
        }
    }

    /// `ε_k = 2^{-(k+2)}`, summing to less than `1/4`.
    pub fn default_epsilons(stages: usize) -> Vec<S> {
        (1..=stages as u32).map(|k| S::pow2_neg(k + 2)).collect()
    }

    pub fn stages(&self) -> usize {
        self.epsilons.len()
    }

    /// 1-based.
    pub fn epsilon(&self, stage: usize) -> S {
        self.epsilons[stage - 1]
    }

    pub fn family_radius(&self, stage: usize) -> Option<i64> {
        self.family_radius.get(stage - 1).copied().flatten()
    }

    pub fn validate(&self, stages: usize) -> Result<()> {
        let op = "construction::params";
        if stages == 0 {
            return Err(Error::config(op, "at least one stage is required"));
        }
        if self.epsilons.len() < stages {
            return Err(Error::config(
                op,
                format!("{} stages requested but only {} tolerances given", stages, self.epsilons.len()),
            ));
        }
        if self.epsilons.iter().any(|e| !(*e > S::zero())) {
            return Err(Error::config(op, "tolerances must be positive"));
        }
        if !(crate::scalar::sum(&self.epsilons) < S::one()) {
            return Err(Error::config(op, "tolerances must sum to less than 1"));
        }
        if self.r < 0 || self.pattern_radius < 0 || self.slack < 0 {
            return Err(Error::config(op, "radii must be nonnegative"));
        }
        if self.r > 40 {
            return Err(Error::config(op, format!("pattern radius r = {} is too large", self.r)));
        }
        let min = self.epsilons[1..].iter().fold(self.epsilons[0], |a, &b| a.min_of(b));
        let quarter = min / S::from_count(4);
        if !(S::pow2_neg(self.r as u32) < quarter) {
            log::warn!(
                "2^-{} is not below min ε / 4 = {}; distinct points may share a cell",
                self.r,
                quarter
            );
        }
        Ok(())
    }
}

/// Everything stage `s` needs, fixed once from samples and then applied to
/// any stage-`(s-1)` window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageState {
    pub stage: usize,
    pub epsilon: f64,
    /// `T_{s-1}`, `{e}` at the first stage.
    pub t_prev: FiniteSubset,
    /// `T_1^4 … T_{s-2}^4 T_{s-1}`: every written region lies in `T̄ d`.
    pub t_bar: FiniteSubset,
    pub m: i64,
    pub f_m: FiniteSubset,
    /// Radius of `E'` in `T_s = F_m E'`.
    pub e_radius: i64,
    pub t: FiniteSubset,
    pub h: FiniteSubset,
    /// `𝓑_s`, blocks on `T_{s-1}` over rows `-(s-1)..=s-1`.
    pub family: Vec<Block>,
    /// Sample index and position where each member was first seen.
    pub origins: Vec<(usize, GroupElement)>,
    /// Per member, a stage-`(s-1)` window around its origin, used to
    /// complete the member beyond `T_{s-1}`.
    #[serde(with = "library_serde")]
    pub library: Vec<ArrayWindow>,
    pub secondary: MarkerParams,
    pub primary: MarkerParams,
    pub secondary_syndeticity: i64,
    pub primary_syndeticity: i64,
    /// Input radius the output at one position depends on.
    pub margin: i64,
    pub search_budget: usize,
}

impl StageState {
    pub fn n(&self) -> usize {
        self.family.len()
    }

    pub fn rows(&self) -> (i32, i32) {
        let k = self.stage as i32 - 1;
        (-k, k)
    }

    /// Recomputes [`StageState::margin`] from the other fields.
    pub fn locality(&self, prev: &[StageState]) -> i64 {
        let r = self.primary.pattern_radius;
        let t_bar = self.t_bar.radius().max(0);
        let t_max = prev.iter().map(|p| p.t.radius()).max().unwrap_or(0);
        let m = self.m;
        let reach = (self.primary.separation + r)
            .max(m + self.secondary.separation + self.secondary.pattern_radius)
            .max(m + t_bar + 2 * t_max);
        t_bar + m + reach
    }
}

mod library_serde {
    use super::ArrayWindow;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[ArrayWindow], s: S) -> Result<S::Ok, S::Error> {
        let values: Vec<serde_json::Value> = v
            .iter()
            .map(|w| {
                let text = crate::arrays::window_to_json(w).map_err(serde::ser::Error::custom)?;
                serde_json::from_str(&text).map_err(serde::ser::Error::custom)
            })
            .collect::<Result<_, _>>()?;
        values.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ArrayWindow>, D::Error> {
        let values = Vec::<serde_json::Value>::deserialize(d)?;
        values
            .iter()
            .map(|v| crate::arrays::window_from_json(&v.to_string()).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// What happened while applying one stage.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    pub primary: Option<MarkerStats>,
    pub secondary: Option<MarkerStats>,
    /// Primary markers whose `F_m c` leaves the secondary decision region.
    pub skipped_markers: usize,
    /// Sites whose enlargement needs cells outside the window.
    pub skipped_sites: usize,
    pub sites: usize,
    pub completions: usize,
    pub written_columns: usize,
    /// Positions written by two different sites.
    pub overlaps: Vec<Vec<i64>>,
    /// Sites whose enlargement `E` misses `T_{s-2} T_{s-1} d ⊆ E ⊆ T̄ d`.
    pub containment_violations: Vec<Vec<i64>>,
    /// Enlargements checked for containment.
    pub containment_checked: usize,
}

/// Per-axis widths of the bounding box of `a`.
fn widths(a: &FiniteSubset) -> Vec<i64> {
    match a.bounds() {
        Some((lo, hi)) => (0..a.dim()).map(|i| hi.coord(i) - lo.coord(i) + 1).collect(),
        None => vec![0; a.dim()],
    }
}

/// Number of grid-packed translates of a box of widths `w` in `F_m`.
fn packing_count(m: i64, w: &[i64]) -> u128 {
    let side = (2 * m + 1) as u128;
    w.iter().map(|&wi| side / wi.max(1) as u128).product()
}

/// `N` pairwise disjoint translates `W g ⊆ f`, laid out on a grid, where `W`
/// is the bounding box of `shape`. `None` if the grid holds fewer.
pub fn packing(f: &FiniteSubset, shape: &FiniteSubset, n: usize) -> Option<Vec<GroupElement>> {
    let (flo, fhi) = f.as_cuboid()?;
    let (slo, _) = shape.bounds()?;
    let w = widths(shape);
    let dim = f.dim();
    let counts: Vec<i64> = (0..dim).map(|i| (fhi.coord(i) - flo.coord(i) + 1) / w[i]).collect();
    if counts.contains(&0) {
        return if n == 0 { Some(Vec::new()) } else { None };
    }
    let grid = crate::gsets::CuboidIter::new(
        GroupElement::identity(dim),
        GroupElement::new(&counts.iter().map(|c| c - 1).collect::<Vec<_>>()).ok()?,
    );
    let out: Vec<GroupElement> = grid
        .take(n)
        .map(|k| {
            let mut g = flo;
            for i in 0..dim {
                g = g.with_coord(i, flo.coord(i) - slo.coord(i) + k.coord(i) * w[i]);
            }
            g
        })
        .collect();
    (out.len() == n).then_some(out)
}

/// Smallest `m ≥ 1` such that `F_m` holds `n` disjoint translates of
/// `t_inner · f_synd` and `n |t_inner|² < ε |F_m|`.
pub fn choose_m<S: Scalar>(
    f_synd: &FiniteSubset,
    n: usize,
    t_inner: &FiniteSubset,
    eps: S,
) -> Result<(i64, FiniteSubset)> {
    if !(eps > S::zero()) {
        return Err(Error::argument("construction::choose_m", "ε must be positive"));
    }
    let dim = t_inner.dim();
    let w = widths(&t_inner.product(f_synd));
    let tsq = (t_inner.len() as u128).pow(2) * n as u128;
    let ok = |m: i64| -> bool {
        if packing_count(m, &w) < n as u128 {
            return false;
        }
        let size = (2 * m as u128 + 1).pow(dim as u32);
        match (usize::try_from(tsq), usize::try_from(size)) {
            (Ok(a), Ok(b)) => {
                let lhs = S::from_count(a);
                let rhs = eps * S::from_count(b);
                lhs < rhs
            }
            _ => (tsq as f64) < eps.to_f64_lossy() * size as f64,
        }
    };
    let limit: i64 = 1 << 40;
    let mut hi = 1i64;
    while !ok(hi) {
        hi *= 2;
        if hi > limit {
            return Err(Error::resource(
                "construction::choose_m",
                format!("no m below {limit} satisfies the packing and size conditions"),
            ));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, FiniteSubset::ball(dim, hi)))
}

/// `E(T, y, levels)`: for `λ = levels, …, 1`, adjoin every `T_λ g` with a Star
/// at row `-λ` meeting `T_λ T`, then multiply by `T_λ`. `prev[λ-1].t` is
/// `T_λ`.
pub fn enlarge(t: &FiniteSubset, y: &ArrayWindow, levels: usize, prev: &[StageState]) -> Result<FiniteSubset> {
    if levels > prev.len() {
        return Err(Error::argument(
            "construction::enlarge",
            format!("{levels} levels requested, {} stages known", prev.len()),
        ));
    }
    let mut cur = t.clone();
    for lam in (1..=levels).rev() {
        let t_l = &prev[lam - 1].t;
        let reach = t_l.inverse().product(&t_l.product(&cur));
        let mut elems: Vec<GroupElement> = cur.iter().collect();
        for g in reach.iter() {
            let c = y.get(&g, -(lam as i32)).ok_or_else(|| Error::Boundary {
                op: "construction::enlarge",
                msg: format!("star row -{lam} needed outside the window"),
                at: Some(g.coords().to_vec()),
            })?;
            if c == Cell::STAR {
                elems.extend(t_l.translate(&g).iter());
            }
        }
        let t_prime = FiniteSubset::from_elements(t.dim(), elems)?;
        cur = t_l.product(&t_prime);
    }
    Ok(cur)
}

/// `T_1^4 … T_{s-2}^4 T_{s-1}` for stage `s = prev.len() + 1`.
pub fn t_bar(dim: usize, prev: &[StageState]) -> FiniteSubset {
    let mut acc = FiniteSubset::identity(dim);
    let Some((last, rest)) = prev.split_last() else {
        return acc;
    };
    for p in rest {
        acc = acc.product(&p.t.power(4));
    }
    acc.product(&last.t)
}

/// Builds stage `prev.len() + 1` from stage-`prev.len()` sample windows.
pub fn step<S: Scalar>(samples: &[ArrayWindow], prev: &[StageState], params: &StageParams<S>) -> Result<StageState> {
    let s = prev.len() + 1;
    let op = "construction::step";
    params.validate(s)?;
    let first = samples
        .first()
        .ok_or_else(|| Error::argument(op, "no sample windows"))?;
    let dim = first.dim();
    if let Some(y) = samples.iter().find(|y| y.band() < s) {
        return Err(Error::argument(op, format!("sample band {} below stage {s}", y.band())));
    }
    let eps = params.epsilon(s);
    let t_prev = prev.last().map(|p| p.t.clone()).unwrap_or_else(|| FiniteSubset::identity(dim));
    let t_bar = t_bar(dim, prev);
    let tb = t_bar.radius().max(0);
    let rows = (-(s as i32 - 1), s as i32 - 1);

    let regions: Vec<Option<(GroupElement, GroupElement)>> = samples
        .iter()
        .map(|y| {
            let inner = y.interior_shrunk(tb)?;
            let (mut lo, mut hi) = (inner.lo(), inner.hi());
            if let Some(rho) = params.family_radius(s) {
                for a in 0..dim {
                    let mid = (y.lo().coord(a) + y.hi().coord(a)).div_euclid(2);
                    lo = lo.with_coord(a, lo.coord(a).max(mid - rho));
                    hi = hi.with_coord(a, hi.coord(a).min(mid + rho));
                }
            }
            Some((lo, hi))
        })
        .collect();
    let usable: Vec<usize> = (0..samples.len()).filter(|&i| regions[i].is_some()).collect();
    let members = if usable.is_empty() {
        Vec::new()
    } else {
        // eps_dense_family scans whole interiors unless given a region; an
        // unusable sample gets an empty one.
        let regs: Vec<Option<(GroupElement, GroupElement)>> = regions
            .iter()
            .map(|r| Some(r.unwrap_or((first.hi(), first.lo()))))
            .collect();
        eps_dense_family(samples, &t_prev, rows, eps, &regs)?
    };
    if members.is_empty() {
        return Err(Error::resource(
            op,
            format!("stage {s}: no block on T_{} fits the sample interiors", s - 1),
        ));
    }
    let n = members.len();
    let mut library = Vec::with_capacity(n);
    for mem in &members {
        let y = &samples[mem.sample];
        let (lo, hi) = crate::grid::shrink_bounds(&mem.origin, &mem.origin, -tb);
        let mut w = y.crop(lo, hi)?;
        w.set_margin(0);
        library.push(w);
    }

    let secondary_t = match prev.last() {
        None => FiniteSubset::identity(dim),
        Some(p) => p.h.inverse().product(&t_bar),
    };
    let secondary = MarkerParams::new(secondary_t, params.pattern_radius, params.slack)?;
    let n_sec = max_syndeticity(samples, &secondary, s, "secondary")?;
    let (m, f_m) = choose_m(&FiniteSubset::ball(dim, n_sec), n, &t_prev, eps)?;
    let primary = MarkerParams::new(f_m.clone(), params.pattern_radius, params.slack)?;
    let n_pri = max_syndeticity(samples, &primary, s, "primary")?;
    let spread: i64 = 4 * prev.iter().map(|p| p.t.radius()).sum::<i64>();
    let h_prev = prev.last().map(|p| p.h.radius()).unwrap_or(0);
    let e_radius = (n_pri + spread).max(h_prev);
    let t = FiniteSubset::ball(dim, m + e_radius);
    let h = collar_window_set(&t, 5)?.h;
    log::info!(
        "stage {s}: N = {n}, m = {m}, |T| = {}, |H| = {}, synd = ({n_sec}, {n_pri})",
        t.len(),
        h.len()
    );
    let mut st = StageState {
        stage: s,
        epsilon: eps.to_f64_lossy(),
        t_prev,
        t_bar,
        m,
        f_m,
        e_radius,
        t,
        h,
        family: members.iter().map(|m| m.block.clone()).collect(),
        origins: members.iter().map(|m| (m.sample, m.origin)).collect(),
        library,
        secondary,
        primary,
        secondary_syndeticity: n_sec,
        primary_syndeticity: n_pri,
        margin: 0,
        search_budget: params.search_budget,
    };
    st.margin = st.locality(prev);
    Ok(st)
}

fn max_syndeticity(samples: &[ArrayWindow], p: &MarkerParams, s: usize, which: &str) -> Result<i64> {
    let mut best: Option<i64> = None;
    for y in samples {
        let ms = match markers(y, p) {
            Ok(ms) => ms,
            Err(Error::Boundary { .. }) => continue,
            Err(e) => return Err(e),
        };
        if let Some(n) = ms.syndeticity_radius() {
            best = Some(best.map_or(n, |b| b.max(n)));
        }
    }
    best.ok_or_else(|| {
        Error::boundary(
            "construction::step",
            format!(
                "stage {s}: no sample is large enough to measure the {which} markers (separation {})",
                p.separation
            ),
        )
    })
}

/// `Ψ_s(y)` with markers computed from `y`.
pub fn apply_stage(y: &ArrayWindow, st: &StageState, prev: &[StageState]) -> Result<(ArrayWindow, StageTrace)> {
    let c = markers(y, &st.primary)?;
    let c_prime = markers(y, &st.secondary)?;
    apply_stage_with_markers(y, st, prev, &c, &c_prime)
}

/// `Ψ_s(y)` driven by the given primary and secondary markers.
pub fn apply_stage_with_markers(
    y: &ArrayWindow,
    st: &StageState,
    prev: &[StageState],
    c: &MarkerSet,
    c_prime: &MarkerSet,
) -> Result<(ArrayWindow, StageTrace)> {
    let s = st.stage;
    let op = "construction::apply_stage";
    if prev.len() + 1 != s {
        return Err(Error::argument(op, format!("stage {s} needs {} earlier stages", s - 1)));
    }
    if y.band() < s {
        return Err(Error::argument(op, format!("band {} below stage {s}", y.band())));
    }
    let k = s as i32 - 1;
    let n = st.n();
    let mut trace = StageTrace {
        stage: s,
        primary: Some(c.stats()),
        secondary: Some(c_prime.stats()),
        ..Default::default()
    };
    let (slo, shi) = c_prime.region();
    let (fmlo, fmhi) = st.f_m.bounds().expect("F_m nonempty");
    let (tlo, thi) = st.t_prev.bounds().expect("T nonempty");
    let offsets = st.f_m.to_vec();
    let band = y.band() as i32;
    let mut out = y.clone();
    let mut touched: HashSet<GroupElement> = HashSet::new();

    for c0 in c.positions().to_vec() {
        let (lo, hi) = (fmlo.op(&c0), fmhi.op(&c0));
        if !in_box(&lo, &slo, &shi) || !in_box(&hi, &slo, &shi) {
            trace.skipped_markers += 1;
            continue;
        }
        let mut sites = Vec::with_capacity(n);
        for u in &offsets {
            if sites.len() == n {
                break;
            }
            if !in_box(&tlo.op(u), &fmlo, &fmhi) || !in_box(&thi.op(u), &fmlo, &fmhi) {
                continue;
            }
            let d = u.op(&c0);
            if c_prime.positions().contains(&d) {
                sites.push(d);
            }
        }
        if sites.len() < n {
            return Err(Error::InsufficientMarkers {
                at: c0.coords().to_vec(),
                found: sites.len(),
                needed: n,
            });
        }
        for (j, d) in sites.iter().enumerate() {
            let base = st.t_prev.translate(d);
            let e = if s >= 3 {
                match enlarge(&base, y, s - 2, prev) {
                    Ok(e) => e,
                    Err(Error::Boundary { .. }) => {
                        trace.skipped_sites += 1;
                        continue;
                    }
                    Err(err) => return Err(err),
                }
            } else {
                base.clone()
            };
            if e.iter().any(|g| !y.contains(&g)) {
                trace.skipped_sites += 1;
                continue;
            }
            if s >= 3 {
                trace.containment_checked += 1;
                let lower = prev[s - 3].t.product(&base);
                let upper = st.t_bar.translate(d);
                if !lower.is_subset(&e) || !e.is_subset(&upper) {
                    trace.containment_violations.push(d.coords().to_vec());
                }
            }
            let source: Source = if e.len() == base.len() {
                Source::Block(&st.family[j])
            } else {
                trace.completions += 1;
                let (w, o) = completion(st, j, &e, d)?;
                Source::Window(w, o)
            };
            trace.sites += 1;
            for g in e.iter() {
                let i = y.index().index_unchecked(&g);
                let top = y
                    .top_row(i)
                    .map(|r| y.column_at(i)[(r + band) as usize])
                    .ok_or_else(|| Error::Corruption {
                        at: g.coords().to_vec(),
                        msg: "column without a non-Zero cell".into(),
                    })?;
                let rel = g.div(d);
                let col = out.column_at_mut(i);
                for row in -k..=k {
                    col[(row + band) as usize] = source.cell(&rel, row);
                }
                col[(s as i32 + band) as usize] = top;
                if base.contains(&g) {
                    col[(-(s as i32) + band) as usize] = if g == *d { Cell::STAR } else { Cell::ONE };
                }
                if !touched.insert(g) {
                    trace.overlaps.push(g.coords().to_vec());
                }
            }
        }
    }
    trace.written_columns = touched.len();
    out.set_margin(y.margin() + st.margin);
    Ok((out, trace))
}

enum Source<'a> {
    Block(&'a Block),
    Window(&'a ArrayWindow, GroupElement),
}

impl Source<'_> {
    fn cell(&self, rel: &GroupElement, row: i32) -> Cell {
        match self {
            Source::Block(b) => b.cell(rel, row).expect("offset inside the block domain"),
            Source::Window(w, o) => w.cell(&rel.op(o), row),
        }
    }
}

/// A library window and an occurrence `o` of `B_j` in it with `E d^{-1} o`
/// inside the window.
fn completion<'a>(
    st: &'a StageState,
    j: usize,
    e: &FiniteSubset,
    d: &GroupElement,
) -> Result<(&'a ArrayWindow, GroupElement)> {
    let (elo, ehi) = e.bounds().expect("nonempty");
    let fits = |w: &ArrayWindow, o: &GroupElement| {
        w.contains(&elo.div(d).op(o)) && w.contains(&ehi.div(d).op(o))
    };
    let own = &st.library[j];
    let origin = st.origins[j].1;
    if fits(own, &origin) {
        return Ok((own, origin));
    }
    let mut tried = 0usize;
    for w in &st.library {
        for o in find_occurrences::<f64>(&st.family[j], w, 0.0) {
            if tried >= st.search_budget {
                break;
            }
            tried += 1;
            if fits(w, &o) {
                return Ok((w, o));
            }
        }
    }
    Err(Error::Completion {
        member: j,
        at: d.coords().to_vec(),
        budget: st.search_budget,
    })
}

/// `Ψ_K ∘ … ∘ Ψ_1`, returning every intermediate window (index 0 is the
/// input) and the per-stage traces.
pub fn compose(y0: &ArrayWindow, states: &[StageState]) -> Result<(Vec<ArrayWindow>, Vec<StageTrace>)> {
    let mut windows = vec![y0.clone()];
    let mut traces = Vec::with_capacity(states.len());
    for (i, st) in states.iter().enumerate() {
        let (y, tr) = apply_stage(windows.last().expect("nonempty"), st, &states[..i])?;
        windows.push(y);
        traces.push(tr);
    }
    Ok((windows, traces))
}

/// The base point read off the topmost non-Zero cell of every interior
/// column.
pub fn recover_base(y: &ArrayWindow) -> Result<BasePattern> {
    let interior = y.interior().ok_or_else(|| {
        Error::boundary("construction::recover_base", "window has no interior")
    })?;
    let band = y.band() as i32;
    let layout: Arc<_> = y.layout_arc();
    let mut symbols = Vec::with_capacity(interior.len());
    for idx in 0..interior.len() {
        let g = interior.point(idx);
        let i = y.index().index_unchecked(&g);
        let cell = y
            .top_row(i)
            .map(|r| y.column_at(i)[(r + band) as usize])
            .unwrap_or(Cell::ZERO);
        match (cell.kind(), cell.pattern()) {
            (CellKind::Point, Some(p)) => symbols.push(layout.center(p)),
            _ => {
                return Err(Error::Corruption {
                    at: g.coords().to_vec(),
                    msg: format!("top cell is {cell:?}, not a point"),
                })
            }
        }
    }
    BasePattern::from_fn(interior.lo(), interior.hi(), layout.alphabet(), |g| {
        symbols[interior.index_unchecked(g)]
    })
}
