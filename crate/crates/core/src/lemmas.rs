//! The invariance-core lemma and the window lemma.
//!
//! `invariance_core(H, F)` is `H_F = {h ∈ H : Fh ⊆ H}`; when `H` is
//! `(F, ε/|F|)`-invariant it keeps more than `(1-ε)|H|` elements.
//!
//! A window certificate for `(F, l)` is a set `H` such that for all `A`, `g`
//! and every `E` with `FA ⊆ E ⊆ F^l A`, some `Fh ⊆ Hg` lies entirely inside or
//! entirely outside `E`. Two certificates are produced:
//!
//! * [`window_set`] searches Følner boxes for the counting certificate: the
//!   core `D = {h ∈ H : F^{-l}Fh ⊆ H}` has `|D| ≥ (1 - 1/(3|F|^{l+1}))|H|`.
//! * [`collar_window_set`] returns `H = B_{(l+2)t}` for `F ⊆ B_t`, `e ∈ F`.
//!   Either some `a ∈ A` has `|a| ≤ (l+1)t`, so `Fa ⊆ H ∩ E`, or every point of
//!   `F^l A` has norm above `t` and `F ⊆ B_t` misses `E`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::gsets::FiniteSubset;
use crate::scalar::Scalar;

/// `H_F = {h ∈ H : Fh ⊆ H}`.
pub fn invariance_core(h: &FiniteSubset, f: &FiniteSubset) -> FiniteSubset {
    let dim = h.dim();
    if f.is_empty() {
        return h.clone();
    }
    if let (Some((hlo, hhi)), Some((flo, fhi))) = (h.as_cuboid(), f.bounds()) {
        // A box H: Fh ⊆ H depends only on the bounding box of F; h ∈ H is
        // separate when e ∉ F.
        let mut lo = hlo;
        let mut hi = hhi;
        for i in 0..dim {
            lo = lo.with_coord(i, hlo.coord(i) - flo.coord(i).min(0));
            hi = hi.with_coord(i, hhi.coord(i) - fhi.coord(i).max(0));
        }
        return FiniteSubset::cuboid(lo, hi);
    }
    let elems: Vec<_> = f.iter().collect();
    FiniteSubset::from_elements(
        dim,
        h.iter().filter(|x| elems.iter().all(|y| h.contains(&y.op(x)))),
    )
    .expect("same dimension")
}

/// The lemma's implication for one instance: if `H` is `(F, ε/|F|)`-invariant
/// then `|H_F| > (1-ε)|H|`.
pub fn check_invariance_lemma<S: Scalar>(f: &FiniteSubset, eps: S, h: &FiniteSubset) -> Result<bool> {
    if !(eps > S::zero() && eps < S::one()) {
        return Err(Error::argument(
            "lemmas::check_invariance_lemma",
            format!("ε = {eps} outside (0, 1)"),
        ));
    }
    let delta = eps / S::from_count(f.len());
    if !h.is_invariant(f, delta)? {
        return Ok(true);
    }
    let core = invariance_core(h, f);
    Ok(S::from_count(core.len()) > (S::one() - eps) * S::from_count(h.len()))
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceSweep {
    pub instances: usize,
    /// Instances where `H` was invariant enough for the lemma to apply.
    pub applicable: usize,
    /// `(N, ε)` pairs where the conclusion failed.
    pub counterexamples: Vec<(i64, f64)>,
}

/// Runs [`check_invariance_lemma`] over `H = [-N, N]^d`, `N = 1..=max_n`.
pub fn invariance_sweep<S: Scalar>(f: &FiniteSubset, eps: &[S], max_n: i64) -> Result<InvarianceSweep> {
    let mut out = InvarianceSweep {
        instances: 0,
        applicable: 0,
        counterexamples: Vec::new(),
    };
    for n in 1..=max_n {
        let h = FiniteSubset::ball(f.dim(), n);
        for &e in eps {
            out.instances += 1;
            let delta = e / S::from_count(f.len());
            if h.is_invariant(f, delta)? {
                out.applicable += 1;
            }
            if !check_invariance_lemma(f, e, &h)? {
                out.counterexamples.push((n, e.to_f64_lossy()));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    Counting,
    Collar,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowCertificate {
    pub f: FiniteSubset,
    pub l: u32,
    pub h: FiniteSubset,
    /// `{h ∈ H : F^{-l}Fh ⊆ H}`.
    pub core: FiniteSubset,
    pub method: CertificateMethod,
}

/// Sets with more elements are checked through bounding boxes rather than by
/// enumerating every core element.
const EXHAUSTIVE_LIMIT: u128 = 20_000_000;

impl WindowCertificate {
    /// `F^{-l}F`.
    pub fn spread(&self) -> FiniteSubset {
        spread(&self.f, self.l)
    }

    /// Re-derives the certificate invariant from scratch.
    pub fn verify(&self) -> std::result::Result<(), String> {
        if !self.f.contains_identity() {
            return Err("F does not contain the identity".into());
        }
        if !self.f.is_subset(&self.h) {
            return Err("F ⊄ H".into());
        }
        match self.method {
            CertificateMethod::Counting => {
                if !self.core.is_subset(&self.h) {
                    return Err("D ⊄ H".into());
                }
                let q = counting_q(self.f.len(), self.l).ok_or("threshold overflows u128")?;
                let lhs = 3 * q * self.core.len() as u128;
                let rhs = (3 * q - 1) * self.h.len() as u128;
                if lhs < rhs {
                    return Err(format!(
                        "|D| = {} below (1 - 1/{}) |H| = {}",
                        self.core.len(),
                        3 * q,
                        self.h.len()
                    ));
                }
                let k = self.spread();
                let work = self.core.len() as u128 * k.len() as u128;
                if work <= EXHAUSTIVE_LIMIT {
                    let ks: Vec<_> = k.iter().collect();
                    for d in self.core.iter() {
                        if let Some(x) = ks.iter().find(|x| !self.h.contains(&x.op(&d))) {
                            return Err(format!("F^-l F h ⊄ H at h = {d} (element {})", x.op(&d)));
                        }
                    }
                } else {
                    let (Some((hlo, hhi)), Some((dlo, dhi)), Some((klo, khi))) =
                        (self.h.as_cuboid(), self.core.as_cuboid(), k.bounds())
                    else {
                        return Err("too large to verify without box structure".into());
                    };
                    let lo = dlo.op(&klo);
                    let hi = dhi.op(&khi);
                    let inside = (0..lo.dim())
                        .all(|i| hlo.coord(i) <= lo.coord(i) && hi.coord(i) <= hhi.coord(i));
                    if !inside {
                        return Err("D · F^-l F leaves H".into());
                    }
                }
                Ok(())
            }
            CertificateMethod::Collar => {
                let t = self.f.radius();
                let need = FiniteSubset::ball(self.f.dim(), (self.l as i64 + 2) * t);
                if need.is_subset(&self.h) {
                    Ok(())
                } else {
                    Err(format!("H does not contain B_(l+2)t with t = {t}"))
                }
            }
        }
    }

    /// The same `H` for a subset `F' ⊆ F` containing the identity.
    pub fn with_subset(&self, f_sub: &FiniteSubset) -> Result<WindowCertificate> {
        if !f_sub.contains_identity() || !f_sub.is_subset(&self.f) {
            return Err(Error::argument(
                "lemmas::with_subset",
                "F' must contain the identity and lie inside F",
            ));
        }
        let core = invariance_core(&self.h, &spread(f_sub, self.l));
        Ok(WindowCertificate {
            f: f_sub.clone(),
            l: self.l,
            h: self.h.clone(),
            core,
            method: self.method,
        })
    }
}

fn spread(f: &FiniteSubset, l: u32) -> FiniteSubset {
    if f.is_centered_ball() {
        return FiniteSubset::ball(f.dim(), (l as i64 + 1) * f.radius());
    }
    f.inverse().power(l).product(f)
}

fn counting_q(size: usize, l: u32) -> Option<u128> {
    let mut q: u128 = 1;
    for _ in 0..=l {
        q = q.checked_mul(size as u128)?;
    }
    q.checked_mul(3)?;
    Some(q)
}

/// Per-axis widths `max - min` of `F^{-l}F`, i.e. `(l+1)` times those of `F`.
fn spread_widths(f: &FiniteSubset, l: u32) -> Vec<i64> {
    let (lo, hi) = f.bounds().expect("nonempty");
    (0..f.dim())
        .map(|i| (l as i64 + 1) * (hi.coord(i) - lo.coord(i)))
        .collect()
}

fn core_size(widths: &[i64], n: i64) -> Option<u128> {
    let side = 2 * n + 1;
    let mut v: u128 = 1;
    for &w in widths {
        if side <= w {
            return Some(0);
        }
        v = v.checked_mul((side - w) as u128)?;
    }
    Some(v)
}

fn counting_holds(f: &FiniteSubset, widths: &[i64], q: u128, n: i64) -> Result<bool> {
    if n < f.radius() {
        return Ok(false);
    }
    let overflow = || Error::resource("lemmas::window_set", format!("box size overflows at n = {n}"));
    let d = core_size(widths, n).ok_or_else(overflow)?;
    let h = core_size(&vec![0; widths.len()], n).ok_or_else(overflow)?;
    let lhs = (3 * q).checked_mul(d).ok_or_else(overflow)?;
    let rhs = (3 * q - 1).checked_mul(h).ok_or_else(overflow)?;
    Ok(lhs >= rhs)
}

/// Smallest Følner box `H = [-n, n]^d ⊇ F` whose core meets the counting
/// threshold, searched up to `n = max_n`.
pub fn window_set(f: &FiniteSubset, l: u32, max_n: i64) -> Result<WindowCertificate> {
    if l < 1 {
        return Err(Error::argument("lemmas::window_set", "l must be ≥ 1"));
    }
    if !f.contains_identity() {
        return Err(Error::argument("lemmas::window_set", "F must contain the identity"));
    }
    let q = counting_q(f.len(), l).ok_or_else(|| {
        Error::resource(
            "lemmas::window_set",
            format!("|F|^(l+1) overflows for |F| = {}, l = {l}", f.len()),
        )
    })?;
    let widths = spread_widths(f, l);
    // Continuous estimate: each axis loses a fraction w/(2n+1), total ≈ 1/(3q).
    let total_w: f64 = widths.iter().map(|&w| w as f64).sum();
    let estimate = ((3.0 * q as f64 * total_w - 1.0) / 2.0).ceil() as i64;
    let start = f.radius().max(1);
    let mut hi = start;
    while !counting_holds(f, &widths, q, hi)? {
        if hi >= max_n {
            return Err(Error::resource(
                "lemmas::window_set",
                format!("no Følner box up to n = {max_n} meets the threshold; about n = {estimate} is required"),
            ));
        }
        hi = (hi * 2).min(max_n);
    }
    let mut lo = start - 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if counting_holds(f, &widths, q, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let h = FiniteSubset::ball(f.dim(), hi);
    let core = invariance_core(&h, &spread(f, l));
    Ok(WindowCertificate {
        f: f.clone(),
        l,
        h,
        core,
        method: CertificateMethod::Counting,
    })
}

/// `H = B_{(l+2)t}` where `t` is the radius of `F`.
pub fn collar_window_set(f: &FiniteSubset, l: u32) -> Result<WindowCertificate> {
    if !f.contains_identity() {
        return Err(Error::argument("lemmas::collar_window_set", "F must contain the identity"));
    }
    let h = FiniteSubset::ball(f.dim(), (l as i64 + 2) * f.radius());
    let core = invariance_core(&h, &spread(f, l));
    Ok(WindowCertificate {
        f: f.clone(),
        l,
        h,
        core,
        method: CertificateMethod::Collar,
    })
}

/// Whether some `Fh ⊆ Hg` lies inside `Hg ∩ E` or inside `Hg \ E`.
///
/// Errors unless `FA ⊆ E ⊆ F^l A`.
pub fn window_check(
    cert: &WindowCertificate,
    a: &FiniteSubset,
    e: &FiniteSubset,
    g: &GroupElement,
) -> Result<bool> {
    let f = &cert.f;
    if !f.product(a).is_subset(e) || !e.is_subset(&f.power(cert.l).product(a)) {
        return Err(Error::argument(
            "lemmas::window_check",
            "E must satisfy FA ⊆ E ⊆ F^l A",
        ));
    }
    let hg = cert.h.translate(g);
    let fits = |h: &GroupElement| f.translate(h).is_subset(&hg);
    // Inside: Fh ⊆ E forces h ∈ f^{-1}E for every f, in particular for e.
    for x in a.iter() {
        if fits(&x) {
            return Ok(true);
        }
    }
    let fl: Vec<_> = f.iter().collect();
    for x in e.iter() {
        for y in &fl {
            let h = y.inv().op(&x);
            if fits(&h) && fl.iter().all(|z| e.contains(&z.op(&h))) {
                return Ok(true);
            }
        }
    }
    // Outside: each element of E blocks at most |F| choices of h, so
    // |E||F| + 1 candidates from the core of Hg settle the question.
    let core = invariance_core(&hg, f);
    if core.is_empty() {
        return Ok(false);
    }
    let needed = e.len() * f.len() + 1;
    let misses = |h: &GroupElement| fl.iter().all(|z| !e.contains(&z.op(h)));
    if core.len() <= needed {
        return Ok(core.iter().any(|h| misses(&h)));
    }
    let mut rho = 0i64;
    loop {
        let probe = FiniteSubset::ball(g.dim(), rho).translate(g).intersection(&core);
        if probe.len() >= needed || probe.len() == core.len() {
            return Ok(probe.iter().any(|h| misses(&h)));
        }
        rho = 2 * rho + 1;
    }
}

/// One input `(A, E, g)` of [`window_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowInstance {
    pub a: FiniteSubset,
    pub e: FiniteSubset,
    pub g: GroupElement,
}

/// A random admissible instance for `cert`: `A` has one to four elements,
/// half of them placed near a face of `Hg`; `E` is `FA` plus a random part of
/// `F^l A \ FA`; `g` lies in `[-spread, spread]^d`.
pub fn random_window_instance<R: Rng + ?Sized>(cert: &WindowCertificate, spread: i64, rng: &mut R) -> WindowInstance {
    let dim = cert.f.dim();
    let n = cert.h.radius();
    let reach = cert.l as i64 * cert.f.radius().max(1) + 1;
    let g = GroupElement::new(&(0..dim).map(|_| rng.gen_range(-spread..=spread)).collect::<Vec<_>>())
        .expect("valid dimension");
    let size = rng.gen_range(1..=4);
    let mut elems = Vec::with_capacity(size);
    for _ in 0..size {
        let mut c: Vec<i64> = (0..dim).map(|_| rng.gen_range(-n - reach..=n + reach)).collect();
        if rng.gen_bool(0.5) {
            let axis = rng.gen_range(0..dim);
            let side = if rng.gen_bool(0.5) { 1 } else { -1 };
            c[axis] = side * (n + rng.gen_range(-2 * reach..=reach));
        }
        elems.push(GroupElement::new(&c).expect("valid dimension").op(&g));
    }
    let a = FiniteSubset::from_elements(dim, elems).expect("same dimension");
    let fa = cert.f.product(&a);
    let outer = cert.f.power(cert.l).product(&a);
    let p: f64 = rng.gen();
    let extra: Vec<GroupElement> = outer
        .iter()
        .filter(|x| !fa.contains(x) && rng.gen_bool(p))
        .collect();
    let e = fa.union(&FiniteSubset::from_elements(dim, extra).expect("same dimension"));
    WindowInstance { a, e, g }
}

/// Outcome of running [`window_check`] over many instances.
#[derive(Clone, Debug, Default, Serialize)]
pub struct WindowSweep {
    pub instances: usize,
    /// `A` sets skipped because `F^l A \ FA` had more than the allowed
    /// number of free positions.
    pub skipped: usize,
    pub failures: Vec<WindowInstance>,
}

/// `window_check` on `count` instances from [`random_window_instance`].
pub fn window_trials<R: Rng + ?Sized>(
    cert: &WindowCertificate,
    count: usize,
    spread: i64,
    rng: &mut R,
) -> Result<WindowSweep> {
    let mut out = WindowSweep::default();
    for _ in 0..count {
        let inst = random_window_instance(cert, spread, rng);
        out.instances += 1;
        if !window_check(cert, &inst.a, &inst.e, &inst.g)? {
            out.failures.push(inst);
        }
    }
    Ok(out)
}

/// `window_check` with `g = e` for every given `A` and every `E` between
/// `FA` and `F^l A`, skipping `A` with more than `max_free` free positions.
pub fn window_sweep_exhaustive(
    cert: &WindowCertificate,
    a_sets: impl IntoIterator<Item = FiniteSubset>,
    max_free: usize,
) -> Result<WindowSweep> {
    let mut out = WindowSweep::default();
    let dim = cert.f.dim();
    let g = GroupElement::identity(dim);
    let fl = cert.f.power(cert.l);
    for a in a_sets {
        let fa = cert.f.product(&a);
        let free: Vec<GroupElement> = fl.product(&a).iter().filter(|x| !fa.contains(x)).collect();
        if free.len() > max_free {
            out.skipped += 1;
            continue;
        }
        let base: Vec<GroupElement> = fa.iter().collect();
        for mask in 0u64..(1u64 << free.len()) {
            let mut elems = base.clone();
            elems.extend(free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| *x));
            let e = FiniteSubset::from_elements(dim, elems)?;
            out.instances += 1;
            if !window_check(cert, &a, &e, &g)? {
                out.failures.push(WindowInstance { a: a.clone(), e, g });
            }
        }
    }
    Ok(out)
}
