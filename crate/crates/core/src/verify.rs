//! Quantitative checks of the finitely checkable claims about constructed
//! stages. Every check yields one [`CheckRecord`]; a
//! [`VerificationReport`] collects them sorted by name.

use serde::{Deserialize, Serialize};

use crate::arrays::{column_distance, occurrence_indices, ArrayWindow, BasePattern, Block, Cell};
use crate::construction::{StageState, StageTrace};
use crate::error::{Error, Result};
use crate::grid::{BoxIndex, PrefixCount};
use crate::group::{Group, GroupElement};
use crate::gsets::FiniteSubset;
use crate::lemmas::collar_window_set;
use crate::markers::markers;
use crate::scalar::Scalar;

/// Sampling slack added to empirical bounds.
pub const DEFAULT_SLACK: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Number of positions, translates or objects the check quantified over.
    pub scope: u64,
    pub pass: bool,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, scope: u64, pass: bool) -> Self {
        CheckRecord {
            name: name.into(),
            scope,
            pass,
            measured: None,
            bound: None,
            slack: None,
            detail: None,
        }
    }

    pub fn measured(mut self, v: f64) -> Self {
        self.measured = Some(v);
        self
    }

    pub fn bound(mut self, v: f64) -> Self {
        self.bound = Some(v);
        self
    }

    pub fn slack(mut self, v: f64) -> Self {
        self.slack = Some(v);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a record, replacing any earlier one with the same name.
    pub fn push(&mut self, rec: CheckRecord) {
        match self.checks.binary_search_by(|c| c.name.cmp(&rec.name)) {
            Ok(i) => self.checks[i] = rec,
            Err(i) => self.checks.insert(i, rec),
        }
    }

    pub fn extend(&mut self, recs: impl IntoIterator<Item = CheckRecord>) {
        for r in recs {
            self.push(r);
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Fixed-width table for terminals.
    pub fn table(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<w$}  {:>4}  {:>10}  {:>12}  {:>12}\n", "check", "ok", "scope", "measured", "bound");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        for c in &self.checks {
            out.push_str(&format!(
                "{:<w$}  {:>4}  {:>10}  {:>12}  {:>12}\n",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.scope,
                fmt(c.measured),
                fmt(c.bound)
            ));
        }
        out
    }
}

/// Result of a change-density scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ChangeDensity {
    /// Largest fraction of changed columns over the translates scanned.
    pub max_fraction: f64,
    pub worst_at: Option<GroupElement>,
    pub translates: u64,
    /// Changed columns in the common interior.
    pub changed: u64,
}

/// Max over translates `F_n g` inside the common interior of the fraction of
/// positions whose full column differs between `before` and `after`.
pub fn change_density(before: &ArrayWindow, after: &ArrayWindow, f_n: &FiniteSubset) -> Result<ChangeDensity> {
    let op = "verify::change_density";
    let (ilo, ihi) = common_interior(before, after).ok_or_else(|| Error::argument(op, "no common interior"))?;
    let base = BoxIndex::new(ilo, ihi).expect("nonempty");
    let (flo, fhi) = f_n
        .as_cuboid()
        .ok_or_else(|| Error::argument(op, "F_n must be a box"))?;
    let mask: Vec<bool> = (0..base.len())
        .map(|i| {
            let g = base.point(i);
            let a = before.column_at(before.index().index_unchecked(&g));
            let b = after.column_at(after.index().index_unchecked(&g));
            !same_column(a, b)
        })
        .collect();
    let changed = mask.iter().filter(|&&m| m).count() as u64;
    let pc = PrefixCount::from_mask(base, &mask);
    let (glo, ghi) = translate_range(&ilo, &ihi, &flo, &fhi);
    let Some(gs) = BoxIndex::new(glo, ghi) else {
        return Err(Error::argument(op, "no F_n translate fits the common interior"));
    };
    let size = f_n.len() as f64;
    let mut best = (0u64, None);
    for i in 0..gs.len() {
        let g = gs.point(i);
        let c = pc.count(&flo.op(&g), &fhi.op(&g));
        if best.1.is_none() || c > best.0 {
            best = (c, Some(g));
        }
    }
    Ok(ChangeDensity {
        max_fraction: best.0 as f64 / size,
        worst_at: best.1,
        translates: gs.len() as u64,
        changed,
    })
}

fn same_column(a: &[Cell], b: &[Cell]) -> bool {
    if a.len() == b.len() {
        return a == b;
    }
    let (short, long) = if a.len() < b.len() { (a, b) } else { (b, a) };
    let lift = (long.len() - short.len()) / 2;
    long[lift..lift + short.len()] == *short && long[..lift].iter().chain(&long[lift + short.len()..]).all(|c| c.is_zero())
}

fn common_interior(a: &ArrayWindow, b: &ArrayWindow) -> Option<(GroupElement, GroupElement)> {
    let ia = a.interior()?;
    let ib = b.interior()?;
    let c = ia.clip(&ib.lo(), &ib.hi())?;
    Some((c.lo(), c.hi()))
}

/// Positions `g` with `[flo, fhi]·g ⊆ [lo, hi]`.
fn translate_range(
    lo: &GroupElement,
    hi: &GroupElement,
    flo: &GroupElement,
    fhi: &GroupElement,
) -> (GroupElement, GroupElement) {
    (lo.div(flo), hi.div(fhi))
}

/// The change-density bound `ε(1 + 2ε)`.
pub fn change_bound<S: Scalar>(eps: S) -> S {
    eps * (S::one() + eps + eps)
}

/// Smallest Følner box that is `(F_m, ε)`-invariant, closed form for boxes.
pub fn invariant_box(f_m: &FiniteSubset, eps: f64) -> Result<FiniteSubset> {
    let dim = f_m.dim();
    let group = Group::new(dim)?;
    let m = f_m.radius().max(0) as f64;
    // (2n + 2m + 1)^d < (1 + ε)(2n + 1)^d  <=>  n > (m / ((1+ε)^{1/d} - 1) - 1) / 2
    let root = (1.0 + eps).powf(1.0 / dim as f64) - 1.0;
    let guess = (((m / root) - 1.0) / 2.0).floor().max(1.0) as i64;
    let mut n = (guess - 2).max(1);
    while !group.folner(n).is_invariant(f_m, eps)? {
        n += 1;
    }
    Ok(group.folner(n))
}

/// Outcome of scanning translates of `H` for occurrences of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct SyndeticScan {
    pub translates: u64,
    pub failures: u64,
    /// First failing translate (in scan order) and the missing member.
    pub worst: Option<(GroupElement, usize)>,
}

/// Every translate `H g` inside the interior of `y` contains an exact
/// occurrence of every member of `family`. `H` and every member domain are
/// treated through their bounding boxes.
pub fn syndetic_block_scan(y: &ArrayWindow, h: &FiniteSubset, family: &[Block]) -> Result<SyndeticScan> {
    let op = "verify::syndetic_block_check";
    let interior = y.interior().ok_or_else(|| Error::argument(op, "window has no interior"))?;
    let (hlo, hhi) = h.bounds().ok_or_else(|| Error::argument(op, "empty H"))?;
    let (glo, ghi) = translate_range(&interior.lo(), &interior.hi(), &hlo, &hhi);
    let Some(gs) = BoxIndex::new(glo, ghi) else {
        return Ok(SyndeticScan {
            translates: 0,
            failures: 0,
            worst: None,
        });
    };
    let mut fail = vec![false; gs.len()];
    let mut worst: Option<(usize, usize)> = None;
    for (j, b) in family.iter().enumerate() {
        let (tlo, thi) = b.domain().bounds().expect("nonempty block");
        let occ = occurrence_indices::<f64>(b, y, &interior.lo().div(&tlo), &interior.hi().div(&thi), 0.0);
        let mut mask = vec![false; interior.len()];
        for i in occ {
            let p = y.index().point(i);
            // the whole occurrence must lie in the interior
            let inside = interior.contains(&tlo.op(&p)) && interior.contains(&thi.op(&p));
            if inside {
                mask[interior.index_unchecked(&p)] = true;
            }
        }
        let pc = PrefixCount::from_mask(interior, &mask);
        for (i, f) in fail.iter_mut().enumerate() {
            if *f {
                continue;
            }
            let g = gs.point(i);
            // occurrence at p with T p ⊆ H g
            let lo = hlo.op(&g).div(&tlo);
            let hi = hhi.op(&g).div(&thi);
            let ok = (0..y.dim()).all(|a| lo.coord(a) <= hi.coord(a)) && pc.count(&lo, &hi) > 0;
            if !ok {
                *f = true;
                if worst.is_none_or(|(wi, _)| i < wi) {
                    worst = Some((i, j));
                }
            }
        }
    }
    Ok(SyndeticScan {
        translates: gs.len() as u64,
        failures: fail.iter().filter(|&&f| f).count() as u64,
        worst: worst.map(|(i, j)| (gs.point(i), j)),
    })
}

/// [`syndetic_block_scan`] as a report entry. An empty family passes; no
/// translate fitting the interior is reported as a failure, since the
/// premise is then untested.
pub fn syndetic_block_check(name: &str, y: &ArrayWindow, h: &FiniteSubset, family: &[Block]) -> CheckRecord {
    if family.is_empty() {
        return CheckRecord::new(name, 0, true).detail("empty family");
    }
    match syndetic_block_scan(y, h, family) {
        Err(e) => CheckRecord::new(name, 0, false).detail(e.to_string()),
        Ok(scan) if scan.translates == 0 => CheckRecord::new(name, 0, false)
            .detail(format!("no translate of H (|H| = {}) fits the interior", h.len())),
        Ok(scan) => {
            let rec = CheckRecord::new(name, scan.translates, scan.failures == 0)
                .measured(scan.failures as f64)
                .bound(0.0);
            match scan.worst {
                Some((g, j)) => rec.detail(format!("translate at {g} misses member {j}")),
                None => rec,
            }
        }
    }
}

/// Exact occurrences of `b` divided by the number of interior translates of
/// its domain.
pub fn empirical_frequency(y: &ArrayWindow, b: &Block) -> Result<f64> {
    let op = "verify::empirical_frequency";
    let interior = y.interior().ok_or_else(|| Error::argument(op, "window has no interior"))?;
    let (tlo, thi) = b
        .domain()
        .bounds()
        .ok_or_else(|| Error::argument(op, "empty block"))?;
    let (glo, ghi) = translate_range(&interior.lo(), &interior.hi(), &tlo, &thi);
    let gs = BoxIndex::new(glo, ghi).ok_or_else(|| Error::argument(op, "block does not fit the interior"))?;
    let occ = occurrence_indices::<f64>(b, y, &glo, &ghi, 0.0).len();
    Ok(occ as f64 / gs.len() as f64)
}

/// `max_n d_Λ(y1(g_n), y2(g_n)) / n` over the enumeration, `n` from 1.
pub fn rho_distance<S: Scalar>(y1: &ArrayWindow, y2: &ArrayWindow, enumeration: &[GroupElement]) -> Result<S> {
    let op = "verify::rho_distance";
    let mut best = S::zero();
    for (n, g) in enumerate_from_one(enumeration) {
        let (Some(i), Some(j)) = (y1.index().index(g), y2.index().index(g)) else {
            return Err(Error::argument(op, format!("{g} outside a window")));
        };
        let d: S = column_distance(y1.layout(), y1.column_at(i), y2.column_at(j))?;
        let v = d / S::from_count(n);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

fn enumerate_from_one(e: &[GroupElement]) -> impl Iterator<Item = (usize, &GroupElement)> {
    e.iter().enumerate().map(|(i, g)| (i + 1, g))
}

/// The checkable premise of the minimality criterion: in every window,
/// every `H_j` translate holds every member of `𝓑_j`, for `j ≤` the given
/// count of stages represented by that window.
pub fn minimality_premise(samples: &[(ArrayWindow, usize)], states: &[StageState]) -> CheckRecord {
    let name = "minimality_premise";
    if states.is_empty() {
        return CheckRecord::new(name, 0, false).detail("no stages");
    }
    let mut scope = 0;
    let mut failures = Vec::new();
    for (si, (y, stage)) in samples.iter().enumerate() {
        for st in states.iter().take(*stage) {
            let rec = syndetic_block_check(name, y, &st.h, &st.family);
            scope += rec.scope;
            if !rec.pass {
                failures.push(format!(
                    "sample {si}, stage {}: {}",
                    st.stage,
                    rec.detail.unwrap_or_default()
                ));
            }
        }
    }
    let rec = CheckRecord::new(name, scope, failures.is_empty()).measured(failures.len() as f64).bound(0.0);
    if failures.is_empty() {
        rec
    } else {
        rec.detail(failures.join("; "))
    }
}

/// The stage invariants: nesting `T_j ⊆ H_j ⊆ T_{j+1}`, the product chain
/// `T_1^4…T_j^4 ⊆ T_{j+1}`, symmetry of `T_j`, the size condition
/// `N_j |T_{j-1}|² < ε_j |F_{m_j}|` and the window certificate of `H_j`.
pub fn stage_invariants(states: &[StageState]) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let mut chain: Option<FiniteSubset> = None;
    for (i, st) in states.iter().enumerate() {
        let s = st.stage;
        let next = states.get(i + 1).map(|n| &n.t);
        let nested = st.t.is_subset(&st.h) && next.is_none_or(|t| st.h.is_subset(t));
        out.push(
            CheckRecord::new(format!("invariants.nesting.stage_{s}"), 1, nested)
                .detail(format!("|T| = {}, |H| = {}", st.t.len(), st.h.len())),
        );
        if let Some(c) = &chain {
            let ok = c.is_subset(&st.t);
            out.push(CheckRecord::new(format!("invariants.product_chain.stage_{s}"), 1, ok));
        }
        let p4 = st.t.power(4);
        chain = Some(match chain {
            None => p4,
            Some(c) => c.product(&p4),
        });
        out.push(CheckRecord::new(
            format!("invariants.symmetric.stage_{s}"),
            1,
            st.t == st.t.inverse(),
        ));
        let lhs = st.n() as f64 * (st.t_prev.len() as f64).powi(2);
        let rhs = st.epsilon * st.f_m.len() as f64;
        let exact = (st.n() as u128) * (st.t_prev.len() as u128).pow(2);
        out.push(
            CheckRecord::new(format!("invariants.size.stage_{s}"), 1, (exact as f64) < rhs && lhs < rhs)
                .measured(lhs)
                .bound(rhs),
        );
        let cert = collar_window_set(&st.t, 5).and_then(|c| {
            if c.h == st.h {
                Ok(c)
            } else {
                Err(Error::Corruption {
                    at: Vec::new(),
                    msg: "H differs from the certificate".into(),
                })
            }
        });
        let rec = match cert.map(|c| c.verify()) {
            Ok(Ok(())) => CheckRecord::new(format!("window_certificate.stage_{s}"), st.h.len() as u64, true),
            Ok(Err(e)) => CheckRecord::new(format!("window_certificate.stage_{s}"), 0, false).detail(e),
            Err(e) => CheckRecord::new(format!("window_certificate.stage_{s}"), 0, false).detail(e.to_string()),
        };
        out.push(rec);
    }
    out
}

/// Base point recovered from `y` against the source on the interior.
pub fn recovery_check(name: &str, y: &ArrayWindow, source: &BasePattern) -> CheckRecord {
    match crate::construction::recover_base(y) {
        Err(e) => CheckRecord::new(name, 0, false).detail(e.to_string()),
        Ok(rec) => {
            let bi = BoxIndex::new(rec.lo(), rec.hi()).expect("nonempty");
            let mut wrong = 0u64;
            let mut first = None;
            for i in 0..bi.len() {
                let g = bi.point(i);
                if rec.get(&g) != source.get(&g) {
                    wrong += 1;
                    first.get_or_insert(g);
                }
            }
            let r = CheckRecord::new(name, bi.len() as u64, wrong == 0).measured(wrong as f64).bound(0.0);
            match first {
                Some(g) => r.detail(format!("first mismatch at {g}")),
                None => r,
            }
        }
    }
}

/// Fraction of interior positions whose row `-s` is non-Zero, against `ε_s`.
/// The comparison with the limit measure is heuristic.
pub fn star_frequency(name: &str, y: &ArrayWindow, st: &StageState) -> CheckRecord {
    let Some(interior) = y.interior() else {
        return CheckRecord::new(name, 0, false).detail("window has no interior");
    };
    let row = -(st.stage as i32);
    let hits = (0..interior.len())
        .filter(|&i| !y.cell(&interior.point(i), row).is_zero())
        .count();
    let f = hits as f64 / interior.len() as f64;
    CheckRecord::new(name, interior.len() as u64, f < st.epsilon)
        .measured(f)
        .bound(st.epsilon)
        .detail("heuristic stand-in for the limit-measure bound")
}

/// Every Star at row `-s` of the stage-`s` output lies in `F_m c` for exactly
/// one primary marker `c` of the input, and those markers are `F_m`-disjoint.
pub fn star_separation(name: &str, input: &ArrayWindow, output: &ArrayWindow, st: &StageState) -> CheckRecord {
    let c = match markers(input, &st.primary) {
        Ok(c) => c,
        Err(e) => return CheckRecord::new(name, 0, false).detail(e.to_string()),
    };
    if let Some((a, b)) = c.disjointness_violation() {
        return CheckRecord::new(name, 0, false).detail(format!("markers {a} and {b} overlap"));
    }
    let Some(interior) = output.interior() else {
        return CheckRecord::new(name, 0, false).detail("window has no interior");
    };
    let m = st.m;
    let region = c.region();
    let row = -(st.stage as i32);
    let mut scope = 0u64;
    let mut bad = None;
    let mask: Vec<bool> = {
        let base = BoxIndex::new(region.0, region.1).expect("nonempty");
        let mut v = vec![false; base.len()];
        for p in c.positions().iter() {
            v[base.index_unchecked(&p)] = true;
        }
        v
    };
    let pc = PrefixCount::from_mask(BoxIndex::new(region.0, region.1).expect("nonempty"), &mask);
    for i in 0..interior.len() {
        let g = interior.point(i);
        if output.cell(&g, row) != Cell::STAR {
            continue;
        }
        let (lo, hi) = crate::grid::shrink_bounds(&g, &g, -m);
        let inside = (0..g.dim()).all(|a| region.0.coord(a) <= lo.coord(a) && hi.coord(a) <= region.1.coord(a));
        if !inside {
            continue;
        }
        scope += 1;
        if pc.count(&lo, &hi) != 1 && bad.is_none() {
            bad = Some(g);
        }
    }
    let rec = CheckRecord::new(name, scope, bad.is_none());
    match bad {
        Some(g) => rec.detail(format!("star at {g} is not covered by exactly one marker")),
        None => rec,
    }
}

/// Everything checked after a run.
pub struct RunArtifacts<'a> {
    pub base: &'a BasePattern,
    /// `windows[k]` is the stage-`k` output; `windows[0]` is the embedding.
    pub windows: &'a [ArrayWindow],
    pub states: &'a [StageState],
    pub traces: &'a [StageTrace],
    pub slack: f64,
}

/// The full suite over a run.
pub fn run_checks(a: &RunArtifacts) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let k = a.states.len();
    if let Some(last) = a.windows.last() {
        rep.push(recovery_check("recover_base.roundtrip", last, a.base));
    }
    rep.extend(stage_invariants(a.states));
    let mut total = 0.0;
    let mut total_bound = 0.0;
    for (i, st) in a.states.iter().enumerate() {
        let s = st.stage;
        let (before, after) = (&a.windows[i], &a.windows[i + 1]);
        let bound = change_bound(st.epsilon) + a.slack;
        let name = format!("change_density.stage_{s}");
        let rec = match invariant_box(&st.f_m, st.epsilon).and_then(|f| change_density(before, after, &f).map(|c| (f, c))) {
            Ok((f, c)) => {
                total += c.max_fraction;
                total_bound += change_bound(st.epsilon);
                let mut r = CheckRecord::new(&name, c.translates, c.max_fraction <= bound)
                    .measured(c.max_fraction)
                    .bound(change_bound(st.epsilon))
                    .slack(a.slack)
                    .detail(format!("F_n radius {}, {} changed columns", f.radius(), c.changed));
                if c.max_fraction > bound {
                    r = r.detail(format!("worst translate at {:?}", c.worst_at));
                }
                r
            }
            Err(e) => CheckRecord::new(&name, 0, false).detail(e.to_string()),
        };
        rep.push(rec);
        rep.push(star_frequency(&format!("star_frequency.stage_{s}"), after, st));
        rep.push(star_separation(&format!("star_separation.stage_{s}"), before, after, st));
        if let Some(tr) = a.traces.get(i) {
            let ok = tr.overlaps.is_empty();
            let mut r = CheckRecord::new(format!("disjoint_writes.stage_{s}"), tr.sites as u64, ok)
                .measured(tr.overlaps.len() as f64)
                .bound(0.0);
            if let Some(p) = tr.overlaps.first() {
                r = r.detail(format!("first overlap at {p:?}"));
            }
            rep.push(r);
            if s >= 3 {
                let ok = tr.containment_violations.is_empty();
                let mut r = CheckRecord::new(format!("enlarge_containment.stage_{s}"), tr.containment_checked as u64, ok)
                    .measured(tr.containment_violations.len() as f64)
                    .bound(0.0);
                if let Some(p) = tr.containment_violations.first() {
                    r = r.detail(format!("first violation at site {p:?}"));
                }
                rep.push(r);
            }
        }
    }
    if k > 0 {
        rep.push(
            CheckRecord::new("change_density.total", k as u64, total <= total_bound + a.slack)
                .measured(total)
                .bound(total_bound)
                .slack(a.slack),
        );
        for i in 1..=k {
            for st in a.states.iter().take(i) {
                let name = format!("syndetic_blocks.output_{i}.family_{}", st.stage);
                rep.push(syndetic_block_check(&name, &a.windows[i], &st.h, &st.family));
            }
        }
        let samples: Vec<(ArrayWindow, usize)> = vec![(a.windows[k].clone(), k)];
        rep.push(minimality_premise(&samples, a.states));
    }
    rep
}
