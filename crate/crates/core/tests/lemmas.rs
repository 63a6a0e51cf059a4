use arraycode::lemmas::{
    collar_window_set, random_window_instance, window_check, window_set, window_trials, WindowCertificate,
};
use arraycode::{FiniteSubset, GroupElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Some translate `Fh ⊆ Hg` lies inside or outside `E`, by enumeration.
fn oracle(cert: &WindowCertificate, e: &FiniteSubset, g: &GroupElement) -> bool {
    let hg = cert.h.translate(g);
    hg.iter().any(|h| {
        let fh = cert.f.translate(&h);
        fh.is_subset(&hg) && (fh.is_subset(e) || !fh.intersects(e))
    })
}

#[test]
fn collar_certificates_verify() {
    for (d, t, l) in [(1, 1, 2), (1, 2, 3), (2, 1, 2), (2, 2, 1)] {
        let f = FiniteSubset::ball(d, t);
        let cert = collar_window_set(&f, l).unwrap();
        cert.verify().unwrap();
        assert_eq!(cert.h.radius(), (l as i64 + 2) * t);
    }
}

#[test]
fn counting_certificate_sizes() {
    // 1 - 2s/(2n+1) ≥ 1 - 1/(3|F|^{l+1}) with s = radius of F^{-l}F.
    for (t, l) in [(1i64, 1u32), (1, 2), (2, 1)] {
        let f = FiniteSubset::ball(1, t);
        let cert = window_set(&f, l, 50_000).unwrap();
        cert.verify().unwrap();
        let s = (l as i64 + 1) * t;
        let q = 3 * (2 * t + 1).pow(l + 1);
        let oracle = (1..).find(|&n: &i64| 2 * s * q <= 2 * n + 1).unwrap();
        assert_eq!(cert.h.radius(), oracle, "F = [-{t}, {t}], l = {l}");
    }
}

#[test]
fn window_check_agrees_with_enumeration_in_two_dimensions() {
    let f = FiniteSubset::ball(2, 1);
    let cert = collar_window_set(&f, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..300 {
        let inst = random_window_instance(&cert, 6, &mut rng);
        assert_eq!(
            window_check(&cert, &inst.a, &inst.e, &inst.g).unwrap(),
            oracle(&cert, &inst.e, &inst.g),
            "{inst:?}"
        );
    }
    let sweep = window_trials(&cert, 300, 6, &mut rng).unwrap();
    assert!(sweep.failures.is_empty());
}

#[test]
fn undersized_certificate_is_rejected() {
    // H = F leaves no room for the core.
    let f = FiniteSubset::ball(1, 1);
    let cert = WindowCertificate {
        f: f.clone(),
        l: 2,
        h: f.clone(),
        core: FiniteSubset::identity(1),
        method: arraycode::lemmas::CertificateMethod::Collar,
    };
    assert!(cert.verify().is_err());
    let a = FiniteSubset::from_elements(1, [GroupElement::from_slice(&[-2])]).unwrap();
    let e = f.product(&a);
    assert_eq!(
        window_check(&cert, &a, &e, &GroupElement::identity(1)).unwrap(),
        oracle(&cert, &e, &GroupElement::identity(1))
    );
}

#[test]
fn inadmissible_collar_is_rejected() {
    let f = FiniteSubset::ball(1, 1);
    let cert = collar_window_set(&f, 2).unwrap();
    let a = FiniteSubset::identity(1);
    let e = FiniteSubset::identity(1);
    assert!(window_check(&cert, &a, &e, &GroupElement::identity(1)).is_err());
}

proptest! {
    #[test]
    fn window_check_agrees_with_enumeration(seed in 0u64..5000, t in 1i64..=2, l in 1u32..=3) {
        let f = FiniteSubset::ball(1, t);
        let cert = collar_window_set(&f, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_window_instance(&cert, 30, &mut rng);
        let got = window_check(&cert, &inst.a, &inst.e, &inst.g).unwrap();
        prop_assert_eq!(got, oracle(&cert, &inst.e, &inst.g));
        prop_assert!(got);
    }

    #[test]
    fn subsets_of_f_with_identity_reuse_the_certificate(mask in 1u8..8, seed in 0u64..1000) {
        let f = FiniteSubset::ball(1, 1);
        let cert = collar_window_set(&f, 2).unwrap();
        let elems: Vec<GroupElement> = f
            .to_vec()
            .into_iter()
            .enumerate()
            .filter(|(i, g)| g.is_identity() || mask >> i & 1 == 1)
            .map(|(_, g)| g)
            .collect();
        let sub = FiniteSubset::from_elements(1, elems).unwrap();
        let restricted = cert.with_subset(&sub).unwrap();
        restricted.verify().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_window_instance(&restricted, 30, &mut rng);
        prop_assert!(window_check(&restricted, &inst.a, &inst.e, &inst.g).unwrap());
    }
}
