use causaldec_demo::{betti_profiles, green_wave, pairing_view};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn wave_is_odd_in_time_around_the_source() {
    let v = parse(green_wave("circle(6)", 12));
    let rows = v["field"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let src = v["source_slice"].as_u64().unwrap() as usize;
    assert!(rows[src].as_array().unwrap().iter().all(|x| x.as_f64().unwrap().abs() < 1e-12));
    let later: f64 = rows[src + 1].as_array().unwrap().iter().map(|x| x.as_f64().unwrap().abs()).sum();
    assert!(later > 0.0);
}

#[test]
fn cylinder_profiles() {
    let v = parse(betti_profiles("circle(3)", 8, 2));
    assert_eq!(v["sc"], serde_json::json!([1, 1, 0]));
    assert_eq!(v["tc"], serde_json::json!([0, 1, 1]));
    assert_eq!(v["sigma_free"], serde_json::json!([1, 1]));
}

#[test]
fn pairing_is_invertible() {
    let v = parse(pairing_view("circle(3)", 8, 2));
    assert_eq!(v["duality"]["passed"], true);
    assert_eq!(v["sc_isomorphism"]["passed"], true);
    assert_eq!(v["tc_isomorphism"]["passed"], true);
}

#[test]
fn errors_are_reported_as_json() {
    assert!(parse(betti_profiles("circle(2)", 8, 2))["error"].is_string());
    assert!(parse(green_wave("torus2(40,40)", 48))["error"].as_str().unwrap().contains("cells"));
}
