use std::sync::Arc;

use causaldec::mesh::{build_sigma_str, Complex, ProductSpacetime, SurfaceDescriptor, TimeAxis};
use causaldec::Error;
use proptest::prelude::*;

const CATALOG: [&str; 11] = [
    "circle(3)",
    "circle(5)",
    "path(4)",
    "path(2)",
    "torus2(3,3)",
    "sphere2",
    "sphere3",
    "torus3(2,2,2)",
    "cylinder(3,2)",
    "disk(5)",
    "line_times_sphere2(3)",
];

fn product(s: &str, n: usize, c: usize) -> ProductSpacetime {
    ProductSpacetime::new(TimeAxis::new(n, c).unwrap(), Arc::new(build_sigma_str(s).unwrap()))
}

#[test]
fn catalog_meshes_verify() {
    for s in CATALOG {
        let r = causaldec::mesh::verify_mesh(&product(s, 6, 1)).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{s}: {} {:?}", c.name, c.witness);
        }
    }
}

#[test]
fn descriptor_examples() {
    let c = build_sigma_str("circle(3)").unwrap();
    assert_eq!((c.count(0), c.count(1)), (3, 3));
    assert!(!c.has_ends());
    let p = build_sigma_str("path(4)").unwrap();
    let ends: Vec<usize> = (0..4).filter(|&v| p.is_end(0, v)).collect();
    assert_eq!(ends, vec![0, 3]);
    assert_eq!(build_sigma_str("sphere3").unwrap().describe(), "5 vertices, 10 edges, 10 triangles, 5 tetrahedra");
}

#[test]
fn product_counts_match_examples() {
    let m = product("circle(3)", 8, 2);
    assert_eq!((m.count(0), m.count(1), m.count(2)), (24, 45, 21));
    let m = ProductSpacetime::new(TimeAxis::new(3, 1).unwrap(), Arc::new(build_sigma_str("path(2)").unwrap()));
    assert_eq!(m.fundamental_class().len(), 2);
}

#[test]
fn bad_descriptors_and_axes() {
    assert!(matches!(build_sigma_str("circle(2)"), Err(Error::TooSmall { .. })));
    assert!(matches!(build_sigma_str("klein(3)"), Err(Error::UnknownDescriptor(_))));
    assert!(matches!(SurfaceDescriptor::parse("torus2(3)"), Err(Error::UnknownDescriptor(_))));
    assert!(matches!(SurfaceDescriptor::parse("path(4, noends)"), Err(Error::UnknownDescriptor(_))));
    assert!(TimeAxis::new(2, 1).is_err());
    assert!(TimeAxis::new(4, 2).is_err());
    assert!(TimeAxis::with_base(8, 2, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn products_are_complexes(n in 3usize..9, ring in 3usize..6, idx in 0usize..3) {
        let s = [format!("circle({ring})"), format!("path({ring})"), format!("torus2({ring},3)")][idx].clone();
        let collar = 1 + (n > 6) as usize;
        let m = product(&s, n, collar);
        for k in 0..m.dim().saturating_sub(1) {
            prop_assert!(m.coboundary(k + 1).matmul(m.coboundary(k)).is_zero());
        }
        let sig = m.sigma();
        for k in 0..=m.dim() {
            let want = n * sig.count(k) + if k > 0 { (n - 1) * sig.count(k - 1) } else { 0 };
            prop_assert_eq!(m.count(k), want);
        }
    }

    #[test]
    fn canonical_round_trips(p in 2usize..7, q in 2usize..7) {
        for s in [format!("torus2({p},{q})"), format!("path({p}, ends)"), format!("line_times_sphere2({p})")] {
            let d = SurfaceDescriptor::parse(&s).unwrap();
            prop_assert_eq!(SurfaceDescriptor::parse(&d.canonical()).unwrap(), d);
        }
    }
}
