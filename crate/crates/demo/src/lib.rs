//! Browser demo: three read-only views over the exact library, each
//! returning a JSON string for the static page in `www/`.

use std::sync::Arc;

use causaldec::cochain::SupportClass;
use causaldec::cohomology::betti_profile;
use causaldec::duality::verify_sc_tc_duality;
use causaldec::homotopy::{verify_sc_isomorphism, verify_tc_isomorphism, TimeBump};
use causaldec::lorentz::{GreenSolver, Lorentzian, MetricData};
use causaldec::mesh::{build_sigma_str, Complex, ProductSpacetime, TimeAxis};
use causaldec::scalar::{one, to_f64, zero};
use causaldec::Error;
use serde_json::{json, Value};

#[cfg(target_arch = "wasm32")]
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_CELLS: usize = 20_000;

fn spacetime(sigma: &str, slices: usize, collar: usize) -> Result<ProductSpacetime, Error> {
    let s = build_sigma_str(sigma)?;
    let m = ProductSpacetime::new(TimeAxis::new(slices, collar)?, Arc::new(s));
    let cells: usize = (0..=m.dim()).map(|k| m.count(k)).sum();
    if cells > MAX_CELLS {
        return Err(Error::Precondition(format!("at most {MAX_CELLS} cells in the browser, got {cells}")));
    }
    Ok(m)
}

fn wrap(r: Result<Value, Error>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn wave(sigma: &str, slices: usize) -> Result<Value, Error> {
    let m = spacetime(sigma, slices, 2)?;
    let nv = m.sigma().count(0);
    let metric = MetricData::unit(m.sigma());
    let l = Lorentzian::new(Arc::new(m), metric)?;
    let g = GreenSolver::new(&l, 0)?;
    let m = l.spacetime();
    let n = m.count(0);
    let mid = slices / 2;
    let src = (0..n).find(|&i| m.slice_of(0, i) == mid).expect("middle slice has vertices");
    let mut f = vec![zero(); n];
    f[src] = one();
    let u: Vec<f64> = g.causal_vec(&f).iter().map(to_f64).collect();
    let rows: Vec<Vec<f64>> = (0..slices).map(|t| (0..nv).map(|v| u[m.index_type1(0, t, v)]).collect()).collect();
    Ok(json!({ "sigma": sigma, "slices": slices, "source_slice": mid, "field": rows }))
}

fn profiles(sigma: &str, slices: usize, collar: usize) -> Result<Value, Error> {
    let m = spacetime(sigma, slices, collar)?;
    let mut out = serde_json::Map::new();
    for s in SupportClass::ALL {
        out.insert(s.as_str().into(), json!(betti_profile(&m, s)?));
    }
    let sigma_c = m.sigma();
    out.insert("sigma_free".into(), json!(betti_profile(sigma_c, SupportClass::Free)?));
    out.insert("sigma_compact".into(), json!(betti_profile(sigma_c, SupportClass::Compact)?));
    Ok(Value::Object(out))
}

fn pairing(sigma: &str, slices: usize, collar: usize) -> Result<Value, Error> {
    let m = spacetime(sigma, slices, collar)?;
    let d = verify_sc_tc_duality(&m)?;
    let bump = TimeBump::default_for(m.time());
    let sc = verify_sc_isomorphism(&m)?;
    let tc = verify_tc_isomorphism(&m, &bump)?;
    Ok(json!({ "duality": d, "sc_isomorphism": sc, "tc_isomorphism": tc }))
}

/// Causal propagator `G = G₊ − G₋` of a unit 0-form source on the middle
/// slice of `time(slices, 2) × sigma`, as slice-by-vertex f64 rows.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn green_wave(sigma: &str, slices: usize) -> String {
    wrap(wave(sigma, slices))
}

/// Betti numbers of the spacetime for all four support classes.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn betti_profiles(sigma: &str, slices: usize, collar: usize) -> String {
    wrap(profiles(sigma, slices, collar))
}

/// SC × TC pairing matrices with the slice isomorphisms behind them.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn pairing_view(sigma: &str, slices: usize, collar: usize) -> String {
    wrap(pairing(sigma, slices, collar))
}
