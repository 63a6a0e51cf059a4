//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use arraycode::arrays::{hat_embed, ArrayWindow, BasePattern, Cell, PatternLayout};
use arraycode::construction::{compose, recover_base};
use arraycode::density::{d_f, SubsetSpec};
use arraycode::error::Error;
use arraycode::lemmas::{
    invariance_core, invariance_sweep, window_check, window_set, window_sweep_exhaustive, window_trials,
    WindowCertificate,
};
use arraycode::markers::{markers, syndeticity_constant, MarkerParams, MarkerSet};
use arraycode::pipeline::{run, write_run_dir, RunConfig, RunOutcome};
use arraycode::{Exact, FiniteSubset, GroupElement, Scalar};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }

    fn err(e: impl std::fmt::Display) -> Self {
        Outcome::new(false, format!("error: {e}"))
    }
}

fn g1(x: i64) -> GroupElement {
    GroupElement::from_slice(&[x])
}

fn interval(a: i64, b: i64) -> FiniteSubset {
    FiniteSubset::cuboid(g1(a), g1(b))
}

fn exact(n: i64, d: i64) -> Exact {
    Exact::new(n, d)
}

// 1. Invariance-core lemma on boxes.

fn criterion_1() -> Outcome {
    let f = FiniteSubset::ball(1, 1);
    let eps = [exact(1, 2), exact(1, 5), exact(1, 10)];
    let sweep = match invariance_sweep(&f, &eps, 300) {
        Ok(s) => s,
        Err(e) => return Outcome::err(e),
    };
    // Oracle: |F[-N,N]| = 2N+3 and |H_F| = 2N-1 in closed form.
    let mut applicable = 0;
    let mut oracle_bad = 0;
    for n in 1..=300i64 {
        let size = Exact::from_integer(2 * n + 1);
        for &e in &eps {
            let delta = e / Exact::from_integer(3);
            let inv = Exact::from_integer(2 * n + 3) < (Exact::one() + delta) * size;
            if inv {
                applicable += 1;
                let core = Exact::from_integer(2 * n - 1);
                if core <= (Exact::one() - e) * size {
                    oracle_bad += 1;
                }
                if invariance_core(&FiniteSubset::ball(1, n), &f).len() as i64 != 2 * n - 1 {
                    oracle_bad += 1;
                }
            }
        }
    }
    let pass = sweep.counterexamples.is_empty() && sweep.applicable == applicable && oracle_bad == 0;
    Outcome::new(
        pass,
        format!(
            "{} instances, {} applicable (oracle {}), {} counterexamples, {} oracle disagreements",
            sweep.instances,
            sweep.applicable,
            applicable,
            sweep.counterexamples.len(),
            oracle_bad
        ),
    )
}

// 2. Window lemma.

/// Brute force in one dimension: some `Fh ⊆ Hg` inside or outside `E`.
fn window_oracle_1d(cert: &WindowCertificate, e: &FiniteSubset, g: &GroupElement) -> bool {
    let (hlo, hhi) = cert.h.bounds().expect("nonempty H");
    let (flo, fhi) = cert.f.bounds().expect("nonempty F");
    let f: Vec<i64> = cert.f.iter().map(|x| x.coord(0)).collect();
    let e: std::collections::HashSet<i64> = e.iter().map(|x| x.coord(0)).collect();
    let lo = hlo.coord(0) + g.coord(0) - flo.coord(0);
    let hi = hhi.coord(0) + g.coord(0) - fhi.coord(0);
    (lo..=hi).any(|h| {
        let inside = f.iter().all(|x| e.contains(&(x + h)));
        let outside = f.iter().all(|x| !e.contains(&(x + h)));
        inside || outside
    })
}

fn boundary_sets(n: i64, reach: i64, max_gap: i64) -> Vec<FiniteSubset> {
    let mut out = Vec::new();
    for side in [-1i64, 1] {
        for k in -3 * reach..=reach {
            let x = side * (n + k);
            out.push(interval(x, x));
            for gap in 1..=max_gap {
                out.push(FiniteSubset::from_elements(1, [g1(x), g1(x + side * gap)]).expect("d=1"));
            }
        }
    }
    out
}

fn criterion_2() -> Outcome {
    let cases: [(FiniteSubset, u32); 3] = [
        (FiniteSubset::ball(1, 1), 2),
        (FiniteSubset::ball(1, 1), 5),
        (FiniteSubset::ball(2, 1), 2),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, (f, l)) in cases.iter().enumerate() {
        let cert = match window_set(f, *l, 20_000) {
            Ok(c) => c,
            Err(e) => return Outcome::err(e),
        };
        if let Err(e) = cert.verify() {
            pass = false;
            parts.push(format!("case {i}: certificate does not verify: {e}"));
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let trials = match window_trials(&cert, 1000, 50, &mut rng) {
            Ok(t) => t,
            Err(e) => return Outcome::err(e),
        };
        let mut oracle_bad = 0;
        if f.dim() == 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            for _ in 0..1000 {
                let inst = arraycode::lemmas::random_window_instance(&cert, 50, &mut rng);
                let lib = window_check(&cert, &inst.a, &inst.e, &inst.g).unwrap_or(false);
                if lib != window_oracle_1d(&cert, &inst.e, &inst.g) {
                    oracle_bad += 1;
                }
            }
        }
        let mut detail = format!(
            "case {i} (d={}, l={l}): |H| = {}, {} trials, {} failures",
            f.dim(),
            cert.h.len(),
            trials.instances,
            trials.failures.len()
        );
        pass &= trials.failures.is_empty() && oracle_bad == 0;
        if f.dim() == 1 {
            let n = cert.h.radius();
            let sweep = if *l == 2 {
                let span = n + 3;
                let mut sets = Vec::new();
                for x in -span..=span {
                    sets.push(interval(x, x));
                    for y in x + 1..=span {
                        sets.push(FiniteSubset::from_elements(1, [g1(x), g1(y)]).expect("d=1"));
                    }
                }
                window_sweep_exhaustive(&cert, sets, 64)
            } else {
                window_sweep_exhaustive(&cert, boundary_sets(n, *l as i64 + 1, 3), 16)
            };
            match sweep {
                Ok(s) => {
                    pass &= s.failures.is_empty() && s.skipped == 0;
                    detail.push_str(&format!(
                        ", exhaustive {} instances, {} skipped, {} failures",
                        s.instances,
                        s.skipped,
                        s.failures.len()
                    ));
                }
                Err(e) => return Outcome::err(e),
            }
            detail.push_str(&format!(", {oracle_bad} oracle disagreements"));
        }
        parts.push(detail);
    }
    Outcome::new(pass, parts.join("; "))
}

// 3. Markers.

fn embed_1d(base: &BasePattern, lo: i64, hi: i64) -> ArrayWindow {
    let layout = Arc::new(PatternLayout::new(1, 0, 2).expect("layout"));
    hat_embed(base, layout, g1(lo), g1(hi), 1).expect("embed")
}

fn sorted_positions(ms: &MarkerSet) -> Vec<i64> {
    let mut v: Vec<i64> = ms.positions().iter().map(|g| g.coord(0)).collect();
    v.sort_unstable();
    v
}

fn marker_seed(seed: u64, p: &MarkerParams) -> Result<String, String> {
    let w = 10_000;
    let base = BasePattern::full_shift(g1(-w), g1(w), 2, seed).map_err(|e| e.to_string())?;
    let y = embed_1d(&base, -w, w);
    let ms = markers(&y, p).map_err(|e| e.to_string())?;
    let pos = sorted_positions(&ms);
    let s = p.separation;

    if let Some((a, b)) = ms.disjointness_violation() {
        return Err(format!("T-translates at {a} and {b} overlap"));
    }
    let t: Vec<i64> = p.t.iter().map(|g| g.coord(0)).collect();
    for w2 in pos.windows(2) {
        let (a, b) = (w2[0], w2[1]);
        if b - a <= s || t.iter().any(|u| t.contains(&(u + b - a))) {
            return Err(format!("markers {a} and {b} are too close"));
        }
    }

    // Equivariance: C(gz)g = C(z) for a shifted crop z of y.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe0);
    for _ in 0..100 {
        let g = rng.gen_range(-1500..=1500i64);
        let half = 7000;
        let z = y.crop(g1(g - half), g1(g + half)).map_err(|e| e.to_string())?;
        let gz = z.act(&g1(g));
        let cz = markers(&gz, p).map_err(|e| e.to_string())?;
        let moved: Vec<i64> = sorted_positions(&cz).iter().map(|x| x + g).collect();
        let (lo, hi) = cz.region();
        let expected: Vec<i64> = pos
            .iter()
            .copied()
            .filter(|x| lo.coord(0) + g <= *x && *x <= hi.coord(0) + g)
            .collect();
        if moved != expected {
            return Err(format!("equivariance fails for g = {g}"));
        }
    }

    // Locality: a change beyond s+R never moves a decision, and one at exactly
    // s+R does for some marker.
    let loc = p.locality();
    let variants = |y: &ArrayWindow, at: i64| -> Vec<ArrayWindow> {
        let mut out = Vec::new();
        for (row, cell) in [(0, None), (1, Some(Cell::ONE)), (1, Some(Cell::STAR)), (-1, Some(Cell::ONE))] {
            let mut v = y.clone();
            let c = cell.unwrap_or_else(|| {
                let cur = y.cell(&g1(at), 0);
                Cell::point(1 - cur.pattern().unwrap_or(0))
            });
            v.set(&g1(at), row, c).expect("in window");
            out.push(v);
        }
        out
    };
    let (rlo, rhi) = ms.region();
    let mut flipped = false;
    for &c in pos.iter().filter(|&&c| c - loc > -w && c + loc < w).take(40) {
        for dir in [-1i64, 1] {
            for v in variants(&y, c + dir * (loc + 1)) {
                let mv = markers(&v, p).map_err(|e| e.to_string())?;
                if !mv.positions().contains(&g1(c)) {
                    return Err(format!("a change at distance {} moved the decision at {c}", loc + 1));
                }
            }
            if !flipped {
                for v in variants(&y, c + dir * loc) {
                    let mv = markers(&v, p).map_err(|e| e.to_string())?;
                    if !mv.positions().contains(&g1(c)) {
                        flipped = true;
                        break;
                    }
                }
            }
        }
    }
    let mut far_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x10c);
    for _ in 0..20 {
        let q = far_rng.gen_range(rlo.coord(0)..=rhi.coord(0));
        let at = if q + loc < w { q + loc + 1 } else { q - loc - 1 };
        for v in variants(&y, at) {
            let mv = markers(&v, p).map_err(|e| e.to_string())?;
            if mv.positions().contains(&g1(q)) != ms.positions().contains(&g1(q)) {
                return Err(format!("a change at distance {} moved the decision at {q}", loc + 1));
            }
        }
    }
    if !flipped {
        return Err(format!("no change at distance {loc} affected any decision"));
    }

    // Syndeticity constant and density.
    let f = syndeticity_constant(&ms, &y).ok_or("no syndeticity constant")?;
    let n = f.radius();
    let (lo, hi) = (rlo.coord(0), rhi.coord(0));
    let mut longest_gap = pos[0] - lo;
    for w2 in pos.windows(2) {
        longest_gap = longest_gap.max(w2[1] - w2[0] - 1);
    }
    longest_gap = longest_gap.max(hi - pos[pos.len() - 1]);
    // Every window of 2n+1 consecutive positions holds a marker iff no gap
    // of 2n+1 empty positions exists.
    let oracle_n = (longest_gap + 1) / 2;
    if n != oracle_n {
        return Err(format!("syndeticity radius {n}, oracle {oracle_n}"));
    }
    let d: Exact = d_f(&SubsetSpec::from_markers(&ms), &f).map_err(|e| e.to_string())?;
    let bound = Exact::ratio(1, f.len());
    if d < bound {
        return Err(format!("D_F = {d} < 1/|F| = {bound}"));
    }
    Ok(format!("{} markers, |F| = {}, D_F = {d}", pos.len(), f.len()))
}

fn criterion_3() -> Outcome {
    let p = MarkerParams::new(FiniteSubset::ball(1, 8), 16, 0).expect("params");
    let mut pass = true;
    let mut notes = Vec::new();
    let mut markers_total = 0usize;
    for seed in 0..10u64 {
        match marker_seed(seed, &p) {
            Ok(s) => {
                markers_total += s.split(' ').next().and_then(|x| x.parse::<usize>().ok()).unwrap_or(0);
            }
            Err(e) => {
                pass = false;
                notes.push(format!("seed {seed}: {e}"));
            }
        }
    }
    let periodic = BasePattern::periodic(g1(-2000), g1(2000), 2, &[0, 1, 1]).expect("periodic");
    let tie = matches!(markers(&embed_1d(&periodic, -2000, 2000), &p), Err(Error::MarkerTie { .. }));
    pass &= tie;
    let mut detail = format!(
        "10 seeds, {markers_total} markers, locality {} exact, periodic control {}",
        p.locality(),
        if tie { "raised a tie" } else { "raised no tie" }
    );
    if !notes.is_empty() {
        detail.push_str(&format!("; {}", notes.join("; ")));
    }
    Outcome::new(pass, detail)
}

// 4. The K=3 pipeline.

fn criterion_4() -> Outcome {
    let mut c = RunConfig::full_shift(1, 3, 50_000, 4);
    c.epsilons = Some(vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]);
    match run(&c) {
        Err(e) => Outcome::new(false, format!("pipeline error: {}", serde_json::to_string(&e.record()).unwrap())),
        Ok(out) => {
            let rep = &out.report.checks;
            let wanted = |n: &str| {
                n.starts_with("recover_base")
                    || n.starts_with("change_density.stage")
                    || n.starts_with("syndetic_blocks")
                    || n.starts_with("enlarge_containment")
                    || n.starts_with("invariants.size")
                    || n.starts_with("invariants.nesting")
                    || n.starts_with("invariants.product_chain")
            };
            let bad: Vec<_> = rep.checks.iter().filter(|r| wanted(&r.name) && !r.pass).map(|r| r.name.clone()).collect();
            Outcome::new(bad.is_empty(), format!("{} checks, failing: {:?}", rep.checks.len(), bad))
        }
    }
}

// Shared reduced two-stage run.

fn reduced_config(radius: i64) -> RunConfig {
    let mut c = RunConfig::full_shift(1, 2, radius, 7);
    c.epsilons = Some(vec![0.5, 0.25]);
    c.family_radius = vec![None, Some(0)];
    c
}

fn reduced_run() -> &'static Result<RunOutcome, String> {
    static RUN: OnceLock<Result<RunOutcome, String>> = OnceLock::new();
    RUN.get_or_init(|| run(&reduced_config(130_000)).map_err(|e| e.to_string()))
}

// 5. Equivariance of the composed code.

fn compare_interiors(a: &ArrayWindow, b: &ArrayWindow) -> Result<u64, String> {
    let (ia, ib) = (a.interior().ok_or("no interior")?, b.interior().ok_or("no interior")?);
    let lo: Vec<i64> = (0..a.dim()).map(|k| ia.lo().coord(k).max(ib.lo().coord(k))).collect();
    let hi: Vec<i64> = (0..a.dim()).map(|k| ia.hi().coord(k).min(ib.hi().coord(k))).collect();
    let (lo, hi) = (GroupElement::from_slice(&lo), GroupElement::from_slice(&hi));
    if (0..a.dim()).any(|k| lo.coord(k) > hi.coord(k)) {
        return Err("empty common interior".into());
    }
    if let Some(g) = a.first_difference(b, &lo, &hi) {
        return Err(format!("windows differ at {g}"));
    }
    Ok((0..a.dim()).map(|k| (hi.coord(k) - lo.coord(k) + 1) as u64).product())
}

fn criterion_5() -> Outcome {
    let out = match reduced_run() {
        Ok(o) => o,
        Err(e) => return Outcome::err(e),
    };
    let y0 = &out.windows[0];
    let full = out.windows.last().expect("output");
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let half = 25_000;
    let mut cells = 0u64;
    for _ in 0..50 {
        let g = rng.gen_range(-90_000..=90_000i64);
        let z = match y0.crop(g1(g - half), g1(g + half)) {
            Ok(z) => z,
            Err(e) => return Outcome::err(e),
        };
        let gel = g1(g);
        let lhs = match compose(&z.act(&gel), &out.states) {
            Ok((w, _)) => w.last().cloned().expect("output"),
            Err(e) => return Outcome::err(format!("g = {g}: {e}")),
        };
        let plain = match compose(&z, &out.states) {
            Ok((w, _)) => w.last().cloned().expect("output"),
            Err(e) => return Outcome::err(format!("g = {g}: {e}")),
        };
        let rhs = plain.act(&gel);
        match compare_interiors(&lhs, &rhs).and_then(|n| compare_interiors(&plain, full).map(|m| n + m)) {
            Ok(n) => cells += n,
            Err(e) => return Outcome::new(false, format!("g = {g}: {e}")),
        }
    }
    Outcome::new(true, format!("50 translates, {cells} interior positions compared"))
}

// 6. Base frequencies through recovery.

fn two_block_counts(x: &BasePattern, lo: &GroupElement, hi: &GroupElement, axis: usize) -> BTreeMap<(u8, u8), usize> {
    let mut out = BTreeMap::new();
    let dim = lo.dim();
    let mut hi2 = *hi;
    hi2 = hi2.with_coord(axis, hi.coord(axis) - 1);
    for g in arraycode::gsets::CuboidIter::new(*lo, hi2) {
        let mut step = vec![0; dim];
        step[axis] = 1;
        let h = g.op(&GroupElement::from_slice(&step));
        *out.entry((x.get(&g).expect("in box"), x.get(&h).expect("in box"))).or_insert(0) += 1;
    }
    out
}

fn frequencies_match(out: &RunOutcome) -> Result<usize, String> {
    let rec = recover_base(out.windows.last().expect("output")).map_err(|e| e.to_string())?;
    let (lo, hi) = (rec.lo(), rec.hi());
    let mut compared = 0;
    for axis in 0..lo.dim() {
        let a = two_block_counts(&rec, &lo, &hi, axis);
        let b = two_block_counts(&out.base, &lo, &hi, axis);
        if a != b {
            return Err(format!("2-block counts differ along axis {axis}: {a:?} vs {b:?}"));
        }
        let mut step = vec![0; lo.dim()];
        step[axis] = 1;
        let p = [GroupElement::identity(lo.dim()), GroupElement::from_slice(&step)];
        let last = hi.with_coord(axis, hi.coord(axis) - 1);
        let lib: BTreeMap<(u8, u8), usize> =
            out.base.pattern_counts(&p, &lo, &last).into_iter().map(|(k, v)| ((k[0], k[1]), v)).collect();
        if lib != b {
            return Err("pattern_counts disagrees with the direct count".into());
        }
        compared += b.values().sum::<usize>();
    }
    Ok(compared)
}

fn criterion_6() -> Outcome {
    let out = match reduced_run() {
        Ok(o) => o,
        Err(e) => return Outcome::err(e),
    };
    match frequencies_match(out) {
        Ok(n) => Outcome::new(true, format!("{n} 2-blocks, recovered counts equal source counts")),
        Err(e) => Outcome::new(false, e),
    }
}

// 7. Determinism.

fn criterion_7() -> Outcome {
    let c = reduced_config(130_000);
    let dirs = [tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir")];
    let mut reports = Vec::new();
    for d in &dirs {
        match run(&c).and_then(|o| write_run_dir(&o, d.path()).map(|_| o)) {
            Ok(o) => reports.push(serde_json::to_vec(&o.report).expect("report json")),
            Err(e) => return Outcome::err(e),
        }
    }
    let mut files = 0;
    let mut differing = Vec::new();
    for entry in walk(dirs[0].path()) {
        let rel = entry.strip_prefix(dirs[0].path()).expect("prefix").to_path_buf();
        let a = std::fs::read(&entry).expect("read");
        let b = std::fs::read(dirs[1].path().join(&rel)).unwrap_or_default();
        files += 1;
        if a != b {
            differing.push(rel.display().to_string());
        }
    }
    let pass = reports[0] == reports[1] && differing.is_empty() && files > 0;
    Outcome::new(
        pass,
        format!("report {} bytes, {files} files compared, differing: {differing:?}", reports[0].len()),
    )
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).expect("read_dir") {
        let p = e.expect("entry").path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

// 8. Two-dimensional smoke run.

fn criterion_8() -> Outcome {
    let mut c = RunConfig::full_shift(2, 1, 128, 8);
    c.marker.pattern_radius = 3;
    let out = match run(&c) {
        Ok(o) => o,
        Err(e) => return Outcome::err(serde_json::to_string(&e.record()).unwrap()),
    };
    let checks = &out.report.checks.checks;
    let selected: Vec<_> = checks
        .iter()
        .filter(|r| {
            r.name.starts_with("recover_base")
                || r.name.starts_with("syndetic_blocks")
                || r.name == "minimality_premise"
                || r.name.starts_with("enlarge_containment")
        })
        .collect();
    let containment = selected.iter().filter(|r| r.name.starts_with("enlarge_containment")).count();
    let bad: Vec<_> = selected.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let syndetic_scope: u64 = selected.iter().filter(|r| r.name.starts_with("syndetic")).map(|r| r.scope).sum();
    let freq = frequencies_match(&out);
    let pass = bad.is_empty() && selected.iter().any(|r| r.name.starts_with("syndetic")) && freq.is_ok();
    Outcome::new(
        pass,
        format!(
            "257x257 window, {} checks selected, {syndetic_scope} H-translates, containment {}, failing {:?}",
            selected.len(),
            if containment == 0 { "holds trivially (E = T d when K = 1)".to_string() } else { format!("{containment} records") },
            bad
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("invariance lemma sweep", criterion_1, Duration::from_secs(10)),
        ("window lemma", criterion_2, Duration::from_secs(60)),
        ("marker properties", criterion_3, Duration::from_secs(600)),
        ("pipeline K=3", criterion_4, Duration::from_secs(600)),
        ("equivariance of codes", criterion_5, Duration::from_secs(600)),
        ("measure stand-in", criterion_6, Duration::from_secs(600)),
        ("determinism", criterion_7, Duration::from_secs(600)),
        ("d=2 smoke", criterion_8, Duration::from_secs(300)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let mut o = f();
        let dt = t.elapsed();
        if dt > *limit {
            o.pass = false;
            o.detail.push_str(&format!("; over the {}s limit", limit.as_secs()));
        }
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{}] {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            dt.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
