use std::sync::Arc;

use causaldec::cochain::{coboundary, cup, integrate, pairing, random_cochain, SupportClass};
use causaldec::cohomology::{betti_profile, cohomology_basis};
use causaldec::mesh::{build_sigma_str, Complex, ProductSpacetime, TimeAxis};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cylinder() -> ProductSpacetime {
    ProductSpacetime::new(TimeAxis::new(8, 2).unwrap(), Arc::new(build_sigma_str("circle(3)").unwrap()))
}

#[test]
fn surface_profiles() {
    let cases: [(&str, SupportClass, &[usize]); 6] = [
        ("circle(3)", SupportClass::Free, &[1, 1]),
        ("path(4)", SupportClass::Compact, &[0, 1]),
        ("torus2(3,3)", SupportClass::Free, &[1, 2, 1]),
        ("sphere2", SupportClass::Free, &[1, 0, 1]),
        ("disk(4)", SupportClass::Compact, &[0, 0, 1]),
        ("sphere3", SupportClass::Free, &[1, 0, 0, 1]),
    ];
    for (s, class, want) in cases {
        let x = build_sigma_str(s).unwrap();
        assert_eq!(betti_profile(&x, class).unwrap(), want, "{s}");
    }
}

#[test]
fn cylinder_profiles() {
    let m = cylinder();
    assert_eq!(betti_profile(&m, SupportClass::SC).unwrap(), vec![1, 1, 0]);
    assert_eq!(betti_profile(&m, SupportClass::TC).unwrap(), vec![0, 1, 1]);
    assert_eq!(betti_profile(&m, SupportClass::Free).unwrap(), vec![1, 1, 0]);
}

#[test]
fn strip_sc_matches_compact_line() {
    let m = ProductSpacetime::new(TimeAxis::new(8, 2).unwrap(), Arc::new(build_sigma_str("path(6)").unwrap()));
    assert_eq!(betti_profile(&m, SupportClass::SC).unwrap(), vec![0, 1, 0]);
}

#[test]
fn basis_reps_are_cocycles_of_their_class() {
    let m = cylinder();
    for s in SupportClass::ALL {
        for k in 0..=m.dim() {
            let h = cohomology_basis(&m, k, s).unwrap();
            for r in h.reps() {
                if k < m.dim() {
                    assert!(coboundary(&m, r).unwrap().is_zero());
                }
                assert_eq!(r.support(), s);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dd_vanishes_and_preserves_support(seed in any::<u64>(), k in 0usize..2, s in 0usize..4) {
        let m = ProductSpacetime::new(TimeAxis::new(6, 1).unwrap(), Arc::new(build_sigma_str("torus2(2,3)").unwrap()));
        let class = SupportClass::ALL[s];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cochain(&m, k, class, &mut rng);
        let dc = coboundary(&m, &c).unwrap();
        prop_assert_eq!(dc.support(), class);
        prop_assert!(coboundary(&m, &dc).unwrap().is_zero());
    }

    #[test]
    fn leibniz(seed in any::<u64>(), p in 0usize..2) {
        let x = build_sigma_str("torus2(3,3)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cochain(&x, p, SupportClass::Free, &mut rng);
        let b = random_cochain(&x, 1 - p.min(1), SupportClass::Free, &mut rng);
        let lhs = coboundary(&x, &cup(&x, &a, &b).unwrap()).unwrap();
        let sign = if p % 2 == 0 { 1 } else { -1 };
        let rhs = cup(&x, &coboundary(&x, &a).unwrap(), &b)
            .unwrap()
            .add(&cup(&x, &a, &coboundary(&x, &b).unwrap()).unwrap().scale(&sign.into()))
            .unwrap();
        prop_assert_eq!(lhs.coeffs(), rhs.coeffs());
    }

    #[test]
    fn stokes_on_compact(seed in any::<u64>()) {
        let m = cylinder();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_cochain(&m, 1, SupportClass::Compact, &mut rng);
        prop_assert_eq!(integrate(&m, &coboundary(&m, &w).unwrap()).unwrap(), 0u32);
    }

    #[test]
    fn pairing_graded_stokes(seed in any::<u64>()) {
        let m = cylinder();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cochain(&m, 0, SupportClass::SC, &mut rng);
        let b = random_cochain(&m, 1, SupportClass::TC, &mut rng);
        let lhs = pairing(&m, &coboundary(&m, &a).unwrap(), &b).unwrap();
        let rhs = -pairing(&m, &a, &coboundary(&m, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
