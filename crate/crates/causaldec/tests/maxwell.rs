use std::sync::Arc;

use causaldec::lorentz::{Lorentzian, MetricData};
use causaldec::maxwell::{Dynamics, Flavor, GaugePartition};
use causaldec::mesh::{build_sigma_str, ProductSpacetime, TimeAxis};
use causaldec::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lorentzian(s: &str, n: usize) -> Lorentzian {
    let m = ProductSpacetime::new(TimeAxis::new(n, 2).unwrap(), Arc::new(build_sigma_str(s).unwrap()));
    let g = MetricData::unit(m.sigma());
    Lorentzian::new(Arc::new(m), g).unwrap()
}

#[test]
fn strip_potential_pairing_invertible() {
    let l = lorentzian("path(8)", 12);
    let s = l.green_solvers().unwrap();
    let d = Dynamics::new(&l, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let o = d.verify_optimality(1, Flavor::Potential, &mut rng).unwrap();
    assert!(o.passed, "{:?}", o.checks);
    assert!(o.negative_control.detected);
}

#[test]
fn torus_faraday_pairing_invertible() {
    let l = lorentzian("torus2(3,3)", 10);
    let s = l.green_solvers().unwrap();
    let d = Dynamics::new(&l, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let o = d.verify_optimality(1, Flavor::Faraday, &mut rng).unwrap();
    assert!(o.passed, "{:?}", o.checks);
    assert_eq!(o.observable_dim, o.solution_dim);
}

#[test]
fn spacelike_analogs_on_long_strip() {
    let l = lorentzian("path(40)", 12);
    let s = l.green_solvers().unwrap();
    let d = Dynamics::new(&l, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in [Flavor::Potential, Flavor::Faraday] {
        let p = d.sc_solution_spaces(1, f, 3, &mut rng).unwrap();
        assert!(p.passed, "{f:?}: {:?}", p.checks);
        assert_eq!(p.source_dim, p.solution_dim);
    }
}

#[test]
fn spacelike_needs_ends() {
    let l = lorentzian("circle(4)", 12);
    let s = l.green_solvers().unwrap();
    let d = Dynamics::new(&l, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    assert!(matches!(d.sc_solution_spaces(1, Flavor::Potential, 2, &mut rng), Err(Error::Precondition(_))));
}

#[test]
fn lorenz_fix_with_custom_ramp_and_off_shell() {
    let l = lorentzian("circle(4)", 12);
    let s = l.green_solvers().unwrap();
    let d = Dynamics::new(&l, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = GaugePartition::ramp(12, 4, 7).unwrap();
    let r = d.verify_lorenz(1, 6, &p, &mut rng).unwrap();
    assert!(r.passed && r.off_shell_rejected, "{:?}", r.witness);
    assert!(GaugePartition::ramp(12, 7, 4).is_err());
}

#[test]
fn short_axis_and_bad_degree_rejected() {
    let l = lorentzian("circle(3)", 8);
    let s = l.green_solvers().unwrap();
    assert!(matches!(Dynamics::new(&l, &s), Err(Error::Precondition(_))));
    let l = lorentzian("circle(3)", 12);
    let s = l.green_solvers().unwrap();
    let d = Dynamics::new(&l, &s).unwrap();
    assert!(matches!(d.check_degree(0), Err(Error::Degree { degree: 0, max: 1 })));
    assert!(matches!(d.potential_solutions(2), Err(Error::Degree { .. })));
}
