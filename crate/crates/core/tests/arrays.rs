use std::sync::Arc;

use arraycode::arrays::{
    block_distance, cell_distance, column_distance, eps_dense_family, find_occurrences, hat_embed, window_from_json,
    window_to_json, ArrayWindow, BasePattern, Block, Cell, PatternLayout,
};
use arraycode::verify::rho_distance;
use arraycode::{Exact, FiniteSubset, GroupElement};
use proptest::prelude::*;

fn g1(x: i64) -> GroupElement {
    GroupElement::from_slice(&[x])
}

fn layout() -> PatternLayout {
    PatternLayout::new(1, 2, 2).unwrap()
}

fn cell() -> impl Strategy<Value = Cell> {
    prop_oneof![
        Just(Cell::ZERO),
        Just(Cell::ONE),
        Just(Cell::STAR),
        (0u64..32).prop_map(Cell::point),
    ]
}

fn column(k: usize) -> impl Strategy<Value = Vec<Cell>> {
    proptest::collection::vec(cell(), 2 * k + 1)
}

fn noisy_window(seed: u64, n: i64, band: usize, stars: &[i64]) -> ArrayWindow {
    let l = Arc::new(PatternLayout::new(1, 1, 2).unwrap());
    let base = BasePattern::full_shift(g1(-n - 1), g1(n + 1), 2, seed).unwrap();
    let mut y = hat_embed(&base, l, g1(-n), g1(n), band).unwrap();
    for &s in stars {
        y.set(&g1(s), -1, Cell::STAR).unwrap();
    }
    y
}

proptest! {
    #[test]
    fn cell_distance_is_an_ultrametric(a in cell(), b in cell(), c in cell()) {
        let l = layout();
        let d = |x, y| cell_distance::<Exact>(&l, x, y);
        prop_assert_eq!(d(a, a), Exact::from_integer(0));
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(a == b || d(a, b) > Exact::from_integer(0));
        prop_assert!(d(a, c) <= d(a, b).max(d(b, c)));
        prop_assert!(d(a, b) <= Exact::from_integer(1));
    }

    #[test]
    fn point_distance_matches_first_disagreement(x in 0u64..32, y in 0u64..32) {
        let l = layout();
        let d = cell_distance::<Exact>(&l, Cell::point(x), Cell::point(y));
        // Oracle: the ring order of B_2 is the canonical order 0, -1, 1, -2, 2.
        let sx = l.symbols(x);
        let sy = l.symbols(y);
        let expected = match (0..sx.len()).find(|&i| sx[i] != sy[i]) {
            None => Exact::from_integer(0),
            Some(i) => {
                let ring = l.offsets()[i].norm_max();
                Exact::new(1, 1 << ring)
            }
        };
        prop_assert_eq!(d, expected);
    }

    #[test]
    fn column_distance_is_a_metric(a in column(3), b in column(3), c in column(3)) {
        let l = layout();
        let d = |x: &[Cell], y: &[Cell]| column_distance::<Exact>(&l, x, y).unwrap();
        prop_assert_eq!(d(&a, &a), Exact::from_integer(0));
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(a == b || d(&a, &b) > Exact::from_integer(0));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        // Σ 2^{-|n|} over seven rows.
        prop_assert!(d(&a, &b) <= Exact::new(11, 4));
    }

    #[test]
    fn rho_distance_is_a_pseudometric(s1 in 0u64..50, s2 in 0u64..50, s3 in 0u64..50) {
        let ys: Vec<_> = [s1, s2, s3].iter().map(|&s| noisy_window(s, 20, 2, &[])).collect();
        let en: Vec<GroupElement> = FiniteSubset::ball(1, 20).iter().collect();
        let d = |i: usize, j: usize| rho_distance::<Exact>(&ys[i], &ys[j], &en).unwrap();
        prop_assert_eq!(d(0, 0), Exact::from_integer(0));
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2));
    }

    #[test]
    fn block_distance_is_sup_of_column_distances(s1 in 0u64..100, s2 in 0u64..100) {
        let y1 = noisy_window(s1, 10, 1, &[0]);
        let y2 = noisy_window(s2, 10, 1, &[3]);
        let dom = FiniteSubset::ball(1, 4);
        let b1 = Block::extract(&y1, &dom, (-1, 1), &g1(0)).unwrap();
        let b2 = Block::extract(&y2, &dom, (-1, 1), &g1(0)).unwrap();
        let l = y1.layout();
        let oracle = dom
            .iter()
            .map(|u| {
                let i = y1.index().index(&u).unwrap();
                column_distance::<Exact>(l, y1.column_at(i), y2.column_at(i)).unwrap()
            })
            .fold(Exact::from_integer(0), |a, b| a.max(b));
        prop_assert_eq!(block_distance::<Exact>(l, &b1, &b2), oracle);
    }

    #[test]
    fn window_json_roundtrip(seed in 0u64..1000, stars in proptest::collection::vec(-30i64..=30, 0..6)) {
        let mut y = noisy_window(seed, 30, 2, &stars);
        y.set(&g1(5), 2, Cell::point(3)).unwrap();
        y.set(&g1(-7), -2, Cell::ONE).unwrap();
        y.set_margin(4);
        let back = window_from_json(&window_to_json(&y).unwrap()).unwrap();
        prop_assert_eq!(&back, &y);
        prop_assert_eq!(back.margin(), 4);
    }
}

#[test]
fn occurrences_match_brute_force() {
    let y = noisy_window(9, 300, 1, &[-100, 0, 150]);
    let dom = FiniteSubset::ball(1, 3);
    for at in [-100, 0, 42, 150] {
        let b = Block::extract(&y, &dom, (-1, 1), &g1(at)).unwrap();
        let found = find_occurrences::<Exact>(&b, &y, Exact::from_integer(0));
        let brute: Vec<GroupElement> = (-297..=297)
            .map(g1)
            .filter(|g| Block::extract(&y, &dom, (-1, 1), g).unwrap() == b)
            .collect();
        let mut found_sorted = found.clone();
        found_sorted.sort_by_key(|g| g.coord(0));
        assert_eq!(found_sorted, brute, "block at {at}");
        assert!(found.contains(&g1(at)));
    }
}

#[test]
fn tolerant_occurrences_are_a_superset() {
    let y = noisy_window(3, 200, 1, &[]);
    let dom = FiniteSubset::ball(1, 2);
    let b = Block::extract(&y, &dom, (0, 0), &g1(10)).unwrap();
    let exact_hits = find_occurrences::<f64>(&b, &y, 0.0);
    let loose = find_occurrences::<f64>(&b, &y, 0.5);
    assert!(exact_hits.iter().all(|g| loose.contains(g)));
    assert!(loose.len() >= exact_hits.len());
    let everything = find_occurrences::<f64>(&b, &y, 1.0);
    assert_eq!(everything.len(), 397);
}

#[test]
fn eps_dense_family_covers_and_separates() {
    let samples = vec![noisy_window(1, 150, 1, &[-50, 0, 60]), noisy_window(2, 150, 1, &[10])];
    let dom = FiniteSubset::ball(1, 2);
    for eps in [0.3f64, 0.1, 0.01] {
        let fam = eps_dense_family(&samples, &dom, (-1, 1), eps, &[None, None]).unwrap();
        let l = samples[0].layout();
        for (i, a) in fam.iter().enumerate() {
            for b in &fam[i + 1..] {
                assert!(block_distance::<f64>(l, &a.block, &b.block) > eps, "members within ε at ε = {eps}");
            }
            assert_eq!(Block::extract(&samples[a.sample], &dom, (-1, 1), &a.origin).unwrap(), a.block);
        }
        for y in &samples {
            let int = y.interior().unwrap();
            for i in 0..int.len() {
                let g = int.point(i);
                let Ok(b) = Block::extract(y, &dom, (-1, 1), &g) else { continue };
                if !y.contains(&g1(g.coord(0) - 2)) || !y.contains(&g1(g.coord(0) + 2)) {
                    continue;
                }
                assert!(
                    fam.iter().any(|m| block_distance::<f64>(l, &m.block, &b) <= eps),
                    "block at {g} uncovered at ε = {eps}"
                );
            }
        }
    }
}
