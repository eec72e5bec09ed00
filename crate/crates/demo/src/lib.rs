//! WebAssembly bindings for the browser demo in `www/`.

use bell_lhv::harness::{commands, emit_report, run_analysis, Config};
use bell_lhv::quantum::{bi_margin, cascade_bi_maximum, cascade_optics};
use bell_lhv::search::maximize_s_star;
use wasm_bindgen::prelude::*;

/// `[theta, lhs]` pairs of the reduced CH left side across the lens aperture,
/// followed by the maximum and its location.
pub fn cascade_curve_values(zeta: f64, both: bool, points: usize) -> Result<Vec<f64>, String> {
    let max = cascade_bi_maximum(zeta, both).map_err(|e| e.to_string())?;
    let factor = if both { 2.0 } else { 1.0 };
    let points = points.clamp(2, 2000);
    let mut out = Vec::with_capacity(2 * points + 2);
    for k in 0..points {
        let theta = std::f64::consts::FRAC_PI_2 * (k as f64 + 1.0) / points as f64;
        let o = cascade_optics(theta, zeta);
        out.push(theta);
        out.push(factor * bi_margin(o.alpha, o.eta, o.v).lhs);
    }
    out.push(max.theta_star);
    out.push(max.max_lhs);
    Ok(out)
}

/// `[eta, S*max, S]` triples for `points` efficiencies from `eta_min` to 1.
pub fn s_star_curve_values(eta_min: f64, points: usize) -> Result<Vec<f64>, String> {
    let points = points.clamp(2, 200);
    let mut out = Vec::with_capacity(3 * points);
    for k in 0..points {
        let eta = eta_min + (1.0 - eta_min) * k as f64 / (points - 1) as f64;
        let r = maximize_s_star(eta).map_err(|e| e.to_string())?;
        out.extend([eta, r.s_star_max, r.genuine_s]);
    }
    Ok(out)
}

/// Simulates a down-conversion run and returns the report in `format`.
pub fn simulate_report(
    v: f64,
    eta: f64,
    n_pairs: u64,
    seed: u64,
    format: &str,
) -> Result<String, String> {
    let cfg = Config::parse(&format!(
        "[pdc]\nv = {v:?}\neta = {eta:?}\n[simulate]\nn_pairs = {n_pairs}\nseed = {seed}\n\
         [analysis]\nemitted_pairs = {n_pairs}\n"
    ))
    .map_err(|e| e.to_string())?;
    let ds = commands::simulate(&cfg, None, None).map_err(|e| e.to_string())?;
    let report = run_analysis(&ds, &cfg).map_err(|e| e.to_string())?;
    emit_report(&report, format).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn cascade_curve(zeta: f64, both: bool, points: usize) -> Result<Vec<f64>, JsError> {
    cascade_curve_values(zeta, both, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn s_star_curve(eta_min: f64, points: usize) -> Result<Vec<f64>, JsError> {
    s_star_curve_values(eta_min, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_analysis(
    v: f64,
    eta: f64,
    n_pairs: f64,
    seed: f64,
    format: &str,
) -> Result<String, JsError> {
    if !(1.0..=1e15).contains(&n_pairs) {
        return Err(JsError::new("pairs per setting must lie in [1, 1e15]"));
    }
    simulate_report(v, eta, n_pairs as u64, seed as u64, format).map_err(|e| JsError::new(&e))
}
