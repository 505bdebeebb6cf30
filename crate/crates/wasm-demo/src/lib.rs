//! Browser bindings: residue colouring of the hexagonal lattice, the
//! congruence bound as a function of `y`, and single bound evaluations.
//! Every entry point returns a JSON string.

use hexpack::asymptotics::{congruence_bound, principal_bound, ring_of_integers_bound, PrimePower};
use hexpack::eisenstein::{split_prime, EisensteinInt};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest `|a|, |b|` accepted by [`residue_points`].
pub const MAX_RADIUS: i64 = 40;
pub const MAX_SAMPLES: u32 = 2000;

pub fn residue_points(p: u64, radius: i64) -> Result<String, String> {
    if !(1..=MAX_RADIUS).contains(&radius) {
        return Err(format!("radius must lie in 1..={MAX_RADIUS}"));
    }
    let info = split_prime(p).map_err(|e| e.to_string())?;
    let mut points = Vec::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            let z = EisensteinInt::new(a, b);
            let [x, y] = z.to_point();
            points.push(json!([x, y, info.reduce(z)]));
        }
    }
    Ok(json!({
        "p": p,
        "kind": info.kind.to_string(),
        "Q": info.q,
        "t": info.t.to_string(),
        "t_point": info.t.to_point(),
        "points": points,
    })
    .to_string())
}

pub fn sweep(q_norm: u64, p: u64, r: u32, log10_min: f64, log10_max: f64, samples: u32) -> Result<String, String> {
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(format!("samples must lie in 2..={MAX_SAMPLES}"));
    }
    if !(log10_min < log10_max && log10_max <= 0.0) {
        return Err("need log10_min < log10_max <= 0".into());
    }
    let pp = PrimePower::new(p, r).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(samples as usize);
    for k in 0..samples {
        let e = log10_min + (log10_max - log10_min) * k as f64 / (samples - 1) as f64;
        let y = 10f64.powf(e).min(1.0);
        let b = congruence_bound(q_norm, &pp, y).map_err(|e| e.to_string())?;
        rows.push(json!({ "log10_y": e, "ell": b.ell, "lambda": b.lambda_lower }));
    }
    Ok(serde_json::Value::from(rows).to_string())
}

pub fn report(family: &str, q_norm: u64, p: u64, r: u32, y: f64) -> Result<String, String> {
    let b = match family {
        "ring" => ring_of_integers_bound(q_norm, r),
        "principal" => PrimePower::new(p, r).and_then(|pp| principal_bound(q_norm, &pp)),
        "congruence" => PrimePower::new(p, r).and_then(|pp| congruence_bound(q_norm, &pp, y)),
        other => return Err(format!("unknown family {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    serde_json::to_string(&b).map_err(|e| e.to_string())
}

/// `Z[ω]` points with `|a|, |b| <= radius`, each as `[x, y, residue class]`.
#[wasm_bindgen]
pub fn residue_field_points(p: u32, radius: i32) -> Result<String, JsValue> {
    residue_points(p.into(), radius.into()).map_err(|e| JsValue::from_str(&e))
}

/// Congruence bound at `samples` values of `y` spaced evenly in `log10 y`.
#[wasm_bindgen]
pub fn congruence_sweep(
    q_norm: u32,
    p: u32,
    r: u32,
    log10_min: f64,
    log10_max: f64,
    samples: u32,
) -> Result<String, JsValue> {
    sweep(q_norm.into(), p.into(), r, log10_min, log10_max, samples).map_err(|e| JsValue::from_str(&e))
}

/// One bound; for `ring`, `r` is the number of code levels.
#[wasm_bindgen]
pub fn bound_report(family: &str, q_norm: u32, p: u32, r: u32, y: f64) -> Result<String, JsValue> {
    report(family, q_norm.into(), p.into(), r, y).map_err(|e| JsValue::from_str(&e))
}
