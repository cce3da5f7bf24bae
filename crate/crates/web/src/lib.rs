//! Browser bindings for the `unidisc` demo page.
//!
//! Each export takes plain numbers or a JSON string and returns a JSON string,
//! so the page needs no generated TypeScript types.

use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use unidisc::bounds::{epsilon_floor, t_min_bounded, t_min_onesided, t_perfect, ErrorMode};
use unidisc::builder::build_parallel;
use unidisc::matrix::{haar_unitary, wrap_phase, UnitaryMatrix};
use unidisc::spectral::{fidelity_closed_form, hull_distance, relative_arc, smallest_arc_of_phases};

fn to_js(r: unidisc::Result<Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// Smallest arc, both fidelity routes, and the closest hull point for a set of
/// eigenphases in radians.
pub fn arc_geometry_value(phases: &[f64]) -> unidisc::Result<Value> {
    let phases: Vec<f64> = phases.iter().map(|&p| wrap_phase(p)).collect();
    let arc = smallest_arc_of_phases(&phases)?;
    let points: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    let hull = hull_distance(&points)?;
    Ok(json!({
        "phases": phases,
        "theta": arc.theta,
        "start_phase": arc.start_phase,
        "end_phase": arc.end_phase,
        "fidelity": fidelity_closed_form(arc.theta)?,
        "hull_distance": hull.distance,
        "closest": [hull.closest.re, hull.closest.im],
        "contains_origin": hull.contains_origin,
    }))
}

/// `phases_json` is a JSON array of radians.
#[wasm_bindgen]
pub fn arc_geometry(phases_json: &str) -> Result<String, JsError> {
    let phases: Vec<f64> = serde_json::from_str(phases_json)?;
    to_js(arc_geometry_value(&phases))
}

const MAX_FLOOR_ROWS: u64 = 256;

/// Query lower bounds for one `(theta, epsilon)` plus the smallest reachable
/// error for every query count up to `ceil(pi / theta)`, at most 256 rows.
pub fn query_bounds_value(theta: f64, epsilon: f64) -> unidisc::Result<Value> {
    let perfect = t_perfect(theta)?;
    // bounded error only makes sense for epsilon <= 1/2
    let bounded = (epsilon <= 0.5).then(|| t_min_bounded(theta, epsilon)).transpose()?;
    let onesided = t_min_onesided(theta, epsilon)?;
    let floors = (0..=perfect.min(MAX_FLOOR_ROWS))
        .map(|t| {
            Ok(json!({
                "t": t,
                "bounded": epsilon_floor(theta, t, ErrorMode::BoundedError)?,
                "onesided": epsilon_floor(theta, t, ErrorMode::OneSidedError)?,
            }))
        })
        .collect::<unidisc::Result<Vec<_>>>()?;
    Ok(json!({
        "theta": theta,
        "t_perfect": perfect,
        "bounded": bounded,
        "onesided": onesided,
        "floors": floors,
    }))
}

#[wasm_bindgen]
pub fn query_bounds(theta: f64, epsilon: f64) -> Result<String, JsError> {
    to_js(query_bounds_value(theta, epsilon))
}

/// Draws a Haar pair and reports its arc and the parallel-scheme overlap for
/// `1..=t_max` copies, simulated and predicted.
pub fn haar_pair_demo_value(dim: usize, seed: u64, t_max: usize) -> unidisc::Result<Value> {
    let u1 = haar_unitary(dim, seed)?;
    let u2 = haar_unitary(dim, seed.wrapping_add(1))?;
    parallel_curve(&u1, &u2, t_max)
}

fn parallel_curve(u1: &UnitaryMatrix, u2: &UnitaryMatrix, t_max: usize) -> unidisc::Result<Value> {
    let (arc, spectrum) = relative_arc(u1, u2)?;
    let mut curve = Vec::new();
    for t in 1..=t_max {
        let plan = match build_parallel(u1, u2, t) {
            Ok(plan) => plan,
            Err(unidisc::Error::Capacity { .. }) => break,
            Err(e) => return Err(e),
        };
        let simulated = plan.trace(u1, u2)?.final_overlap;
        curve.push(json!({ "t": t, "simulated": simulated, "predicted": plan.predicted_overlap }));
    }
    Ok(json!({
        "phases": spectrum.phases,
        "theta": arc.theta,
        "start_phase": arc.start_phase,
        "end_phase": arc.end_phase,
        "fidelity": fidelity_closed_form(arc.theta)?,
        "t_perfect": t_perfect(arc.theta)?,
        "curve": curve,
    }))
}

#[wasm_bindgen]
pub fn haar_pair_demo(dim: usize, seed: u64, t_max: usize) -> Result<String, JsError> {
    to_js(haar_pair_demo_value(dim, seed, t_max))
}
