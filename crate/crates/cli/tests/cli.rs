use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causaldec"))
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn text(o: &[u8]) -> String {
    String::from_utf8_lossy(o).into_owned()
}

fn run(cfg: &Path, suite: &str, out: &Path, workers: &str) -> Output {
    bin()
        .args(["run", cfg.to_str().unwrap(), suite, "-o", out.to_str().unwrap()])
        .env("CAUSALDEC_WORKERS", workers)
        .output()
        .unwrap()
}

const SMALL: &str = r#"
[run]
seed = 11
homotopy_samples = 4
compatibility_samples = 2
green_samples = 1
lorenz_inputs = 2
generator_samples = 2

[[fixture]]
name = "ring"
sigma = "circle(3)"
slices = 12
collar = 2
expect_sc = [1, 1, 0]

[fixture.maxwell]
degrees = [1]

[[surface]]
name = "segment"
sigma = "path(4)"
"#;

#[test]
fn describe_sphere3() {
    let o = bin().args(["describe", "sphere3"]).output().unwrap();
    assert!(o.status.success());
    assert_eq!(text(&o.stdout).lines().next(), Some("5 vertices, 10 edges, 10 triangles, 5 tetrahedra"));
}

#[test]
fn describe_circle_and_unknown() {
    let o = bin().args(["describe", "circle(3)"]).output().unwrap();
    let s = text(&o.stdout);
    assert!(s.starts_with("3 vertices, 3 edges\n"), "{s}");
    assert!(s.contains("end collar: none"));
    let o = bin().args(["describe", "nosuch"]).output().unwrap();
    assert!(!o.status.success());
    assert!(text(&o.stderr).contains("nosuch"));
}

#[test]
fn schema_is_json() {
    let o = bin().arg("report-schema").output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["properties"]["format"]["const"], "causaldec-report");
}

#[test]
fn broken_config_fails_with_line() {
    let out = scratch("broken").join("r.json");
    let o = run(&root().join("broken.cfg"), "all", &out, "1");
    assert!(!o.status.success());
    let e = text(&o.stderr);
    assert!(e.contains("line 10") && e.contains("circle(2)"), "{e}");
}

#[test]
fn bad_inputs_rejected() {
    let dir = scratch("bad");
    let cfg = dir.join("deg.cfg");
    std::fs::write(&cfg, SMALL.replace("degrees = [1]", "degrees = [0, 1]")).unwrap();
    let o = run(&cfg, "all", &dir.join("r.json"), "1");
    assert!(!o.status.success());
    assert!(text(&o.stderr).contains("line 18"), "{}", text(&o.stderr));
    let o = run(&root().join("default.cfg"), "nosuite", &dir.join("r.json"), "1");
    assert!(!o.status.success());
    let o = run(&root().join("default.cfg"), "all", &dir.join("r.json"), "zero");
    assert!(!o.status.success());
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let dir = scratch("det");
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, format!("{SMALL}\n").replace("seed = 11", &format!("seed = 11\ncsv_dir = {:?}", dir.join("csv")))).unwrap();
    let a = run(&cfg, "all", &dir.join("a.json"), "1");
    assert!(a.status.success(), "{}{}", text(&a.stdout), text(&a.stderr));
    let b = run(&cfg, "all", &dir.join("b.json"), "4");
    assert!(b.status.success());
    let ra = std::fs::read(dir.join("a.json")).unwrap();
    let rb = std::fs::read(dir.join("b.json")).unwrap();
    assert_eq!(ra, rb);
    let v: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(v["summary"]["jobs"], 9);
    let jobs = std::fs::read_to_string(dir.join("csv/jobs.csv")).unwrap();
    assert_eq!(jobs.lines().count(), 10);
    assert!(std::fs::read_to_string(dir.join("csv/betti.csv")).unwrap().contains("ring,sc,0,1"));
}

#[test]
fn failing_expectation_exits_one() {
    let dir = scratch("fail");
    let cfg = dir.join("f.cfg");
    std::fs::write(&cfg, SMALL.replace("expect_sc = [1, 1, 0]", "expect_sc = [0, 1, 0]")).unwrap();
    let o = run(&cfg, "betti", &dir.join("r.json"), "1");
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stdout).contains("FAIL  betti      ring"));
}

#[test]
fn default_betti_reports_einstein_profile() {
    let dir = scratch("betti");
    let out = dir.join("r.json");
    let o = run(&root().join("default.cfg"), "betti", &out, "2");
    assert!(o.status.success(), "{}", text(&o.stdout));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let job = v["results"].as_array().unwrap().iter().find(|j| j["fixture"] == "einstein_static").unwrap();
    assert_eq!(job["data"]["profiles"]["sc"], serde_json::json!([1, 0, 0, 1, 0]));
}

#[test]
fn default_homotopy_passes() {
    let dir = scratch("homotopy");
    let o = run(&root().join("default.cfg"), "homotopy", &dir.join("r.json"), "2");
    assert!(o.status.success(), "{}", text(&o.stdout));
}
