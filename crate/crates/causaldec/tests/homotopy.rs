use std::sync::Arc;

use causaldec::cochain::{random_cochain, SupportClass};
use causaldec::homotopy::{check_p_identity, check_q_identity, verify_sc_isomorphism, verify_tc_isomorphism, TimeBump};
use causaldec::mesh::{build_sigma_str, Complex, ProductSpacetime, TimeAxis};
use causaldec::scalar::frac;
use causaldec::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spacetime(s: &str, n: usize, c: usize) -> ProductSpacetime {
    ProductSpacetime::new(TimeAxis::new(n, c).unwrap(), Arc::new(build_sigma_str(s).unwrap()))
}

#[test]
fn bump_validation() {
    let t = TimeAxis::new(8, 2).unwrap();
    assert!(matches!(TimeBump::at_edge(&t, 0), Err(Error::Bump(_))));
    assert!(matches!(TimeBump::at_edge(&t, 6), Err(Error::Bump(_))));
    assert!(TimeBump::at_edge(&t, 3).is_ok());
    let half = vec![0.into(), 0.into(), frac(1, 2), frac(1, 2), 0.into(), 0.into(), 0.into()];
    assert!(TimeBump::new(&t, half).is_ok());
    let short = vec![0.into(), 0.into(), frac(1, 2), 0.into(), 0.into(), 0.into(), 0.into()];
    assert!(matches!(TimeBump::new(&t, short), Err(Error::Bump(_))));
}

#[test]
fn isomorphisms_on_surfaces_with_ends() {
    for s in ["path(5)", "disk(4)"] {
        let m = spacetime(s, 8, 2);
        let b = TimeBump::default_for(m.time());
        assert!(verify_sc_isomorphism(&m).unwrap().passed, "{s}");
        assert!(verify_tc_isomorphism(&m, &b).unwrap().passed, "{s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn p_identity_on_sc_cochains(seed in any::<u64>(), k in 0usize..3, idx in 0usize..3) {
        let m = [spacetime("circle(3)", 8, 2), spacetime("path(4)", 7, 1), spacetime("torus2(2,3)", 6, 1)][idx].clone();
        prop_assume!(k <= m.dim());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cochain(&m, k, SupportClass::SC, &mut rng);
        prop_assert_eq!(check_p_identity(&m, &c).unwrap(), None);
    }

    #[test]
    fn q_identity_with_any_bump(seed in any::<u64>(), k in 0usize..3, edge in 2usize..5, split in 1i64..4) {
        let m = spacetime("circle(3)", 8, 2);
        prop_assume!(!m.time().is_collar_edge(edge + 1));
        let mut a = vec![0.into(); m.time().n_edges()];
        a[edge] = frac(split, 4);
        a[edge + 1] = frac(4 - split, 4);
        let bump = TimeBump::new(m.time(), a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cochain(&m, k, SupportClass::TC, &mut rng);
        prop_assert_eq!(check_q_identity(&m, &c, &bump).unwrap(), None);
    }
}
