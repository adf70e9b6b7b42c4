//! Browser bindings: image curves of a map, its radial profiles, and a ring
//! modulus estimate. Each returns JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use spiralfd::analysis::{image_curves, lifted_rotation_ln, ImageCurve};
use spiralfd::construct::{
    build_rotation, build_submain_1, build_submain_p, distortion_field, BuildOptions, Gauge, Phi, RadialMap,
    RadialProfile, TargetModulus,
};
use spiralfd::modulus::{discrete_modulus, ring_modulus, ring_radial};

fn build(theorem: &str, p: f64, depth: usize) -> Result<RadialMap, String> {
    if !(1..=12).contains(&depth) {
        return Err("depth must lie in 1..=12".into());
    }
    let opts = BuildOptions::new(depth);
    let r = match theorem {
        "submain_p" => {
            let t = TargetModulus::new(Phi::power(5.0).map_err(|e| e.to_string())?, p).map_err(|e| e.to_string())?;
            build_submain_p(&t, &Gauge::compression(t.clone()), &opts)
        }
        "submain_1" => build_submain_1(1.0, &Gauge::log_pow(0.25).map_err(|e| e.to_string())?, &opts),
        "rotation" => build_rotation(&Gauge::log_pow(0.25).map_err(|e| e.to_string())?, &opts),
        other => return Err(format!("unknown theorem {other}")),
    };
    r.map_err(|e| e.to_string())
}

fn ln_floor(map: &RadialMap) -> f64 {
    map.blocks().last().map_or(-5.0, |b| b.annulus.ln_inner() - 1.0)
}

#[derive(Serialize)]
struct Curves {
    ln_min: f64,
    curves: Vec<ImageCurve>,
}

pub fn image_grid_json(theorem: &str, p: f64, depth: usize, curves: usize, samples: usize) -> Result<String, String> {
    if curves == 0 || curves > 200 || samples > 5000 {
        return Err("curves must lie in 1..=200 and samples in 2..=5000".into());
    }
    let map = build(theorem, p, depth)?;
    let ln_min = ln_floor(&map);
    // circles equally spaced in ln ln(1/t), so every stage shows up
    let (a, b) = (1f64.ln(), (-ln_min).ln());
    let circles: Vec<f64> = (0..curves)
        .map(|k| -(a + (b - a) * (k as f64 + 0.5) / curves as f64).exp())
        .collect();
    let curves = image_curves(&map, &circles, curves, ln_min, samples).map_err(|e| e.to_string())?;
    serde_json::to_string(&Curves { ln_min, curves }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Profile {
    ln_t: Vec<f64>,
    ln_modulus: Vec<f64>,
    ln_rotation: Vec<Option<f64>>,
    ln_distortion: Vec<f64>,
    stages: Vec<[f64; 2]>,
}

pub fn rotation_profile_json(theorem: &str, p: f64, depth: usize, points: usize) -> Result<String, String> {
    if !(2..=20_000).contains(&points) {
        return Err("points must lie in 2..=20000".into());
    }
    let map = build(theorem, p, depth)?;
    let field = distortion_field(&map);
    let ln_min = ln_floor(&map);
    let mut out = Profile {
        ln_t: Vec::with_capacity(points),
        ln_modulus: Vec::with_capacity(points),
        ln_rotation: Vec::with_capacity(points),
        ln_distortion: Vec::with_capacity(points),
        stages: map.blocks().iter().map(|b| [b.annulus.ln_inner(), b.annulus.ln_outer()]).collect(),
    };
    for k in 0..points {
        let lt = ln_min * k as f64 / (points - 1) as f64;
        let tau = if lt < 0.0 { lifted_rotation_ln(&map, lt).map_err(|e| e.to_string())? } else { map.rotation(0.0) };
        out.ln_t.push(lt);
        out.ln_modulus.push(map.ln_modulus(lt));
        out.ln_rotation.push((!tau.is_zero()).then(|| tau.ln_abs()));
        out.ln_distortion.push(field.ln_k(lt));
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RingOut {
    value: f64,
    oracle: f64,
    iterations: usize,
    gap: f64,
}

pub fn ring_modulus_json(aspect: f64, paths: usize, grid: usize) -> Result<String, String> {
    if !(aspect > 1.0 && aspect <= 100.0) || !(8..=2048).contains(&paths) || !(16..=1024).contains(&grid) {
        return Err("need 1 < aspect <= 100, 8 <= paths <= 2048, 16 <= grid <= 1024".into());
    }
    let fam = ring_radial(1.0, aspect, paths, 16).map_err(|e| e.to_string())?;
    let out = discrete_modulus(&fam, grid, None).map_err(|e| e.to_string())?;
    serde_json::to_string(&RingOut {
        value: out.report.value,
        oracle: ring_modulus(1.0, aspect),
        iterations: out.stats.iterations,
        gap: out.stats.gap,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn image_grid(theorem: &str, p: f64, depth: usize, curves: usize, samples: usize) -> Result<String, JsValue> {
    image_grid_json(theorem, p, depth, curves, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rotation_profile(theorem: &str, p: f64, depth: usize, points: usize) -> Result<String, JsValue> {
    rotation_profile_json(theorem, p, depth, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ring_modulus_estimate(aspect: f64, paths: usize, grid: usize) -> Result<String, JsValue> {
    ring_modulus_json(aspect, paths, grid).map_err(|e| JsValue::from_str(&e))
}
