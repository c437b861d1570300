//! One line per acceptance criterion, computed from two full runs of the
//! shipped default configuration.

use std::path::PathBuf;

use causaldec::config::{Config, Selector};
use causaldec::maxwell::Flavor;
use causaldec::report::{FieldData, RunReport, SuiteData};
use causaldec::suites::{RunOptions, Runner};

fn default_config() -> Config {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../default.cfg");
    Config::load(&path).expect("default.cfg loads")
}

fn data<'r>(r: &'r RunReport, fixture: &str, suite: &str) -> Result<&'r SuiteData, String> {
    let j = r.find(fixture, suite).ok_or_else(|| format!("no {fixture}/{suite} job"))?;
    if let Some(e) = &j.error {
        return Err(format!("{fixture}/{suite}: {e}"));
    }
    j.data.as_ref().ok_or_else(|| format!("{fixture}/{suite} has no data"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

const TOPOLOGY: [&str; 5] = ["einstein_static", "gowdy", "schwarzschild_topology", "cylinder", "torus_slab"];
const BETTI: [&str; 3] = ["einstein_static", "gowdy", "schwarzschild_topology"];

fn betti(r: &RunReport) -> Result<(), String> {
    let want: [(&str, &str, &[usize]); 5] = [
        ("einstein_static", "sc", &[1, 0, 0, 1, 0]),
        ("einstein_static", "tc", &[0, 1, 0, 0, 1]),
        ("gowdy", "sc", &[1, 3, 3, 1, 0]),
        ("gowdy", "tc", &[0, 1, 3, 3, 1]),
        ("schwarzschild_topology", "sc", &[0, 1, 0, 1, 0]),
    ];
    for (f, class, w) in want {
        let SuiteData::Betti(b) = data(r, f, "betti")? else { return Err(format!("{f}: wrong data")) };
        let got = b.profiles.get(class).ok_or_else(|| format!("{f}: no {class} profile"))?;
        ensure(got.as_slice() == w, || format!("{f} {class}: {got:?} instead of {w:?}"))?;
    }
    Ok(())
}

fn homotopy(r: &RunReport) -> Result<(), String> {
    for f in ["cylinder", "torus_slab"] {
        let SuiteData::Homotopy(h) = data(r, f, "homotopy")? else { return Err(format!("{f}: wrong data")) };
        let dim = h.sc_isomorphism.degrees.len();
        ensure(h.identities.checks.len() == 2 * dim, || format!("{f}: {} identity checks", h.identities.checks.len()))?;
        for c in &h.identities.checks {
            ensure(c.samples == 100, || format!("{f} {} degree {}: {} samples", c.identity, c.degree, c.samples))?;
            ensure(c.failures == 0, || format!("{f} {} degree {}: {:?}", c.identity, c.degree, c.witness))?;
        }
    }
    Ok(())
}

fn isomorphisms(r: &RunReport) -> Result<(), String> {
    for f in TOPOLOGY {
        let SuiteData::Homotopy(h) = data(r, f, "homotopy")? else { return Err(format!("{f}: wrong data")) };
        for iso in [&h.sc_isomorphism, &h.tc_isomorphism] {
            for d in &iso.degrees {
                ensure(d.dim_sigma == d.dim_spacetime && d.mutually_inverse, || {
                    format!("{f} {} degree {}: dims {} and {}", iso.kind, d.degree, d.dim_sigma, d.dim_spacetime)
                })?;
            }
        }
    }
    Ok(())
}

fn duality(r: &RunReport) -> Result<(), String> {
    let surfaces = ["circle3", "torus33", "octahedron", "simplex_boundary", "segment"];
    for (f, kind) in BETTI.iter().map(|f| (*f, "sc-tc")).chain(surfaces.iter().map(|f| (*f, "compact-free"))) {
        let SuiteData::Duality(d) = data(r, f, "duality")? else { return Err(format!("{f}: wrong data")) };
        ensure(d.pairing.kind == kind, || format!("{f}: pairing kind {}", d.pairing.kind))?;
        for p in &d.pairing.degrees {
            ensure(p.invertible, || format!("{f} degrees ({}, {}): {:?}", p.left_degree, p.right_degree, d.pairing.witness))?;
        }
    }
    Ok(())
}

fn compatibility(r: &RunReport) -> Result<(), String> {
    for f in TOPOLOGY {
        let SuiteData::Duality(d) = data(r, f, "duality")? else { return Err(format!("{f}: wrong data")) };
        let c = d.compatibility.as_ref().ok_or_else(|| format!("{f}: no lemma check"))?;
        let degrees = d.pairing.degrees.len() - 1;
        ensure(c.random_pairs == 50 * degrees, || format!("{f}: {} random pairs", c.random_pairs))?;
        ensure(c.basis_pairs > 0 && c.failures == 0, || format!("{f}: {:?}", c.witness))?;
    }
    Ok(())
}

fn green(r: &RunReport) -> Result<(), String> {
    let required = ["box_green_identity", "cone_containment", "adjointness", "kernel_equals_box_image"];
    for f in ["wave_cylinder", "wave_torus"] {
        let SuiteData::Green(g) = data(r, f, "green")? else { return Err(format!("{f}: wrong data")) };
        let top = g.degrees.len() - 1;
        for d in &g.degrees {
            let mut names: Vec<&str> = required.to_vec();
            if d.degree < top {
                names.push("d_commutes");
            }
            if d.degree > 0 {
                names.push("delta_commutes");
            }
            for n in names {
                let c = d.checks.iter().find(|c| c.name == n).ok_or_else(|| format!("{f} degree {}: no {n}", d.degree))?;
                ensure(c.passed && c.cases > 0, || format!("{f} degree {} {n}: {:?}", d.degree, c.witness))?;
            }
            ensure(d.kernel.kernel_dim == d.kernel.image_rank, || format!("{f} degree {}: kernel ranks differ", d.degree))?;
        }
    }
    Ok(())
}

fn field<'r>(r: &'r RunReport, f: &str, suite: &str) -> Result<&'r FieldData, String> {
    match data(r, f, suite)? {
        SuiteData::Field(d) => Ok(d),
        _ => Err(format!("{f}/{suite}: wrong data")),
    }
}

fn lorenz_and_bijectivity(r: &RunReport) -> Result<(), String> {
    for (f, degrees) in [("wave_cylinder", &[1][..]), ("gauge_torus", &[1, 2][..])] {
        let d = field(r, f, "maxwell")?;
        for &k in degrees {
            let e = d.degrees.iter().find(|e| e.degree == k).ok_or_else(|| format!("{f}: no degree {k}"))?;
            let l = e.lorenz.as_ref().ok_or_else(|| format!("{f} k={k}: no Lorenz check"))?;
            ensure(l.inputs == 20 && l.passed && l.off_shell_rejected, || format!("{f} k={k}: {:?}", l.witness))?;
            let p = e.parametrization.as_ref().ok_or_else(|| format!("{f} k={k}: no parametrization"))?;
            ensure(p.passed && p.source_dim == p.solution_dim && p.rank == p.solution_dim, || {
                format!("{f} k={k}: {} sources, {} solutions, rank {}", p.source_dim, p.solution_dim, p.rank)
            })?;
        }
    }
    Ok(())
}

/// Report rationals are `p/q` strings.
fn is_zero(q: &str) -> bool {
    q.split('/').next() == Some("0")
}

fn optimality(r: &RunReport) -> Result<(), String> {
    for f in ["wave_cylinder", "wave_torus", "gauge_torus"] {
        for (suite, flavor) in [("maxwell", Flavor::Potential), ("faraday", Flavor::Faraday)] {
            let d = field(r, f, suite)?;
            ensure(d.flavor == flavor, || format!("{f}/{suite}: flavor {}", d.flavor.as_str()))?;
            for e in &d.degrees {
                let o = e.optimality.as_ref().ok_or_else(|| format!("{f}/{suite} k={}: no pairing", e.degree))?;
                let det_nonzero = o.determinant.as_deref().is_some_and(|d| !is_zero(d));
                ensure(o.passed && det_nonzero && o.rank == o.solution_dim, || {
                    format!("{f}/{suite} k={}: {}x{} rank {}", e.degree, o.observable_dim, o.solution_dim, o.rank)
                })?;
                let n = &o.negative_control;
                ensure(n.detected && n.appended_row_zero && n.appended_rank == o.rank, || {
                    format!("{f}/{suite} k={}: negative control missed", e.degree)
                })?;
                ensure(n.replaced_row_determinant.as_deref().is_some_and(is_zero), || format!("{f}/{suite}: replaced row"))?;
                ensure(n.replaced_column_determinant.as_deref().is_some_and(is_zero), || format!("{f}/{suite}: replaced column"))?;
            }
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let cfg = default_config();
    let first = Runner::new(&cfg, RunOptions { workers: 2, float_timing: false }).unwrap().run(Selector::All);
    let second = Runner::new(&cfg, RunOptions { workers: 1, float_timing: false }).unwrap().run(Selector::All);
    let (a, b) = (first.to_json(), second.to_json());
    let determinism = ensure(a == b, || {
        let line = a.lines().zip(b.lines()).position(|(x, y)| x != y).unwrap_or(0) + 1;
        format!("reports first differ at line {line}")
    });

    let criteria: [(&str, Result<(), String>); 9] = [
        ("betti profiles", betti(&first)),
        ("homotopy identities", homotopy(&first)),
        ("induced isomorphisms", isomorphisms(&first)),
        ("duality pairings", duality(&first)),
        ("compatibility lemma", compatibility(&first)),
        ("green contract", green(&first)),
        ("lorenz gauge and bijectivity", lorenz_and_bijectivity(&first)),
        ("optimality", optimality(&first)),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, res)) in criteria.iter().enumerate() {
        match res {
            Ok(()) => println!("criterion {}: {name}: PASS", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: {name}: FAIL ({e})", i + 1);
            }
        }
    }
    assert!(first.passed, "failed jobs: {:?}", first.summary.failures);
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
