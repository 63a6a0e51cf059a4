use std::sync::Arc;

use arraycode::arrays::{hat_embed, ArrayWindow, BasePattern, PatternLayout};
use arraycode::density::{d_f, SubsetSpec};
use arraycode::markers::{markers, syndeticity_constant, MarkerParams};
use arraycode::{Exact, FiniteSubset, GroupElement, Scalar};
use proptest::prelude::*;

fn window_2d(seed: u64, n: i64) -> ArrayWindow {
    let lo = GroupElement::from_slice(&[-n, -n]);
    let hi = GroupElement::from_slice(&[n, n]);
    let base = BasePattern::full_shift(lo, hi, 2, seed).unwrap();
    hat_embed(&base, Arc::new(PatternLayout::new(2, 0, 2).unwrap()), lo, hi, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn planar_markers_are_separated_and_equivariant(seed in 0u64..10_000, gx in -10i64..=10, gy in -10i64..=10) {
        let p = MarkerParams::new(FiniteSubset::ball(2, 2), 3, 1).unwrap();
        let y = window_2d(seed, 40);
        let c = markers(&y, &p).unwrap();
        prop_assert!(c.disjointness_violation().is_none());
        let pts = c.positions().to_vec();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                prop_assert!(p.t.translate(a).intersection(&p.t.translate(b)).is_empty());
            }
        }
        let g = GroupElement::from_slice(&[gx, gy]);
        let cg = markers(&y.act(&g), &p).unwrap();
        let back = cg.positions().translate(&g);
        prop_assert_eq!(back.to_vec(), pts);
    }

    #[test]
    fn planar_syndeticity_constant_bounds_density(seed in 0u64..10_000) {
        let p = MarkerParams::new(FiniteSubset::ball(2, 1), 2, 0).unwrap();
        let y = window_2d(seed, 40);
        let c = markers(&y, &p).unwrap();
        let f = syndeticity_constant(&c, &y).unwrap();
        let spec = SubsetSpec::from_markers(&c);
        let d: Exact = d_f(&spec, &f).unwrap();
        prop_assert!(d >= Exact::ratio(1, f.len()));
        if f.radius() > 0 {
            // Minimality: one size down, some translate misses every marker.
            let smaller = FiniteSubset::ball(2, f.radius() - 1);
            prop_assert_eq!(d_f::<Exact>(&spec, &smaller).unwrap(), Exact::from_integer(0));
        }
    }
}

#[test]
fn periodic_planar_point_is_a_tie() {
    let lo = GroupElement::from_slice(&[-20, -20]);
    let hi = GroupElement::from_slice(&[20, 20]);
    let base = BasePattern::periodic(lo, hi, 2, &[0, 1]).unwrap();
    let y = hat_embed(&base, Arc::new(PatternLayout::new(2, 0, 2).unwrap()), lo, hi, 1).unwrap();
    let p = MarkerParams::new(FiniteSubset::ball(2, 1), 2, 0).unwrap();
    let err = markers(&y, &p).unwrap_err();
    assert!(matches!(err, arraycode::Error::MarkerTie { .. }), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn window_too_small_for_the_locality_radius() {
    let y = window_2d(1, 4);
    let p = MarkerParams::new(FiniteSubset::ball(2, 2), 3, 0).unwrap();
    assert!(matches!(markers(&y, &p), Err(arraycode::Error::Boundary { .. })));
}
