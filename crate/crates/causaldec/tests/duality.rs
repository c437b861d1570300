use std::sync::Arc;

use causaldec::duality::{verify_classical_duality, verify_compatibility_lemma, verify_sc_tc_duality};
use causaldec::homotopy::TimeBump;
use causaldec::mesh::{build_sigma_str, ProductSpacetime, TimeAxis};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn classical_on_catalog() {
    for s in ["circle(4)", "torus2(2,3)", "sphere2", "sphere3", "path(4)", "disk(5)", "cylinder(3,3)"] {
        let r = verify_classical_duality(&build_sigma_str(s).unwrap()).unwrap();
        assert!(r.passed, "{s}: {:?}", r.witness);
    }
}

#[test]
fn sc_tc_with_ends() {
    let m = ProductSpacetime::new(TimeAxis::new(8, 2).unwrap(), Arc::new(build_sigma_str("path(5)").unwrap()));
    let r = verify_sc_tc_duality(&m).unwrap();
    assert!(r.passed, "{:?}", r.witness);
    let dims: Vec<(usize, usize)> = r.degrees.iter().map(|d| (d.left_dim, d.right_dim)).collect();
    assert_eq!(dims, vec![(0, 0), (1, 1), (0, 0)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lemma_holds_for_every_admissible_bump(seed in any::<u64>(), edge in 2usize..6) {
        let m = ProductSpacetime::new(TimeAxis::new(9, 2).unwrap(), Arc::new(build_sigma_str("torus2(2,2)").unwrap()));
        let bump = TimeBump::at_edge(m.time(), edge).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = verify_compatibility_lemma(&m, &bump, 3, &mut rng).unwrap();
        prop_assert!(r.passed, "{:?}", r.witness);
    }
}
