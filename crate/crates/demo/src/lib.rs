//! Three interactive views over `unigraph` for the browser: averaged dual
//! profiles against the target, the planar lattice's error field, and the
//! hyperbolic net with its parent tree in the Poincaré disk.
//!
//! Each view is a plain function returning JSON; the `wasm_bindgen`
//! exports wrap them.

use serde_json::json;
use unigraph::betaseq::SortedWindow;
use unigraph::hyperbolic::{build_hyperbolic, HyperbolicParams, ROOT};
use unigraph::lowdisc::QuadraticIrrational;
use unigraph::planar::{build_gamma, estimate_c, glue_from_c, BetaSource, LatticePoint, LatticeSpec};
use unigraph::profiles::{h0, linspace, DualProfile, TARGET_HALF_WIDTH};
use unigraph::BetaSequence;
use wasm_bindgen::prelude::*;

const MAX_WINDOW: u32 = 100_000;
const MAX_HALF_WIDTH: u32 = 160;
const MAX_NET_POINTS: f64 = 200_000.0;

/// `h⁰` and the averaged profile of peaks `start..start+len` on `points`
/// samples, with the exact scaled error `len·sup|h − h⁰|`.
pub fn profile_curves(alpha: &str, start: i64, len: u32, points: u32) -> Result<String, String> {
    if len == 0 || len > MAX_WINDOW {
        return Err(format!("window length must be in 1..={MAX_WINDOW}"));
    }
    if !(3..=4096).contains(&points) {
        return Err("points must be in 3..=4096".into());
    }
    let seq = BetaSequence::new(QuadraticIrrational::from_label(alpha).map_err(|e| e.to_string())?);
    let betas = seq.window(start, start + i64::from(len)).map_err(|e| e.to_string())?;
    let profile = DualProfile::averaged_from(TARGET_HALF_WIDTH, &betas).map_err(|e| e.to_string())?;
    let mut w = SortedWindow::default();
    for &b in &betas {
        w.insert(b);
    }
    let xi: Vec<f64> = linspace(-TARGET_HALF_WIDTH, TARGET_HALF_WIDTH, points as usize).collect();
    let target: Vec<f64> = xi.iter().map(|&x| h0(x).unwrap_or(0.0)).collect();
    let window: Vec<f64> = xi.iter().map(|&x| profile.eval(x)).collect();
    Ok(json!({
        "xi": xi,
        "target": target,
        "window": window,
        "scaled_error": w.sup_error(),
    })
    .to_string())
}

/// `d_Γ(0, q) − |q|` for every lattice point `q` of the query box of a
/// lattice with the given half-width; `M` is calibrated with a fixed seed.
pub fn planar_error_field(alpha: &str, half_width: u32) -> Result<String, String> {
    if !(4..=MAX_HALF_WIDTH).contains(&half_width) {
        return Err(format!("half-width must be in 4..={MAX_HALF_WIDTH}"));
    }
    let seq = BetaSequence::new(QuadraticIrrational::from_label(alpha).map_err(|e| e.to_string())?);
    let spec = LatticeSpec::new(half_width, BetaSource::Sequence(seq)).map_err(|e| e.to_string())?;
    let c_hat = estimate_c(&spec, 2000, 1).map_err(|e| e.to_string())?;
    let m = glue_from_c(c_hat);
    let spec = spec.with_glue(m).map_err(|e| e.to_string())?;
    let g = build_gamma(&spec).map_err(|e| e.to_string())?;
    let origin = g.vertex(LatticePoint::new(0, 0)).ok_or("origin missing")?;
    let dist = g.graph().distances_from(origin).map_err(|e| e.to_string())?;
    let q = spec.query_margin as i32;
    let mut errors = Vec::with_capacity(((2 * q + 1) * (2 * q + 1)) as usize);
    for j in -q..=q {
        for i in -q..=q {
            let p = LatticePoint::new(i, j);
            let v = g.vertex(p).ok_or("vertex missing")?;
            errors.push(dist[v as usize] - p.euclid(&LatticePoint::new(0, 0)));
        }
    }
    let max_abs = errors.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    Ok(json!({
        "side": 2 * q + 1,
        "errors": errors,
        "max_abs": max_abs,
        "c_hat": c_hat,
        "glue_length": m,
    })
    .to_string())
}

/// Net points in the Poincaré disk with parent indices, plus the
/// constants of the shortcut layer.
pub fn hyperbolic_net(radius: f64, epsilon: f64, reach_factor: f64) -> Result<String, String> {
    if !(epsilon > 0.0 && radius > epsilon) {
        return Err("need 0 < epsilon < radius".into());
    }
    let estimate = ((radius + 0.5 * epsilon).cosh() - 1.0) / ((0.5 * epsilon).cosh() - 1.0);
    if estimate > 4.0 * MAX_NET_POINTS {
        return Err("net would be too large for the browser; lower the radius or raise epsilon".into());
    }
    let mut params = HyperbolicParams::new(radius, epsilon, epsilon, 1);
    params.reach_factor = reach_factor;
    let g = build_hyperbolic(&params).map_err(|e| e.to_string())?;
    let n = g.net.len() as u32;
    let disk: Vec<[f64; 2]> = g.net.points().iter().map(|p| p.poincare().into()).collect();
    let parent: Vec<u32> = (0..n)
        .map(|q| if q == ROOT { ROOT } else { g.tree.parent(q) })
        .collect();
    Ok(json!({
        "points": disk,
        "parent": parent,
        "morse_constant": g.morse,
        "reach": g.reach,
        "shortcut_length": g.shortcut_len,
        "max_degree": g.uniformity_report().max_degree,
    })
    .to_string())
}

#[wasm_bindgen(js_name = profileCurves)]
pub fn profile_curves_js(alpha: &str, start: i32, len: u32, points: u32) -> Result<String, JsError> {
    profile_curves(alpha, i64::from(start), len, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = planarErrorField)]
pub fn planar_error_field_js(alpha: &str, half_width: u32) -> Result<String, JsError> {
    planar_error_field(alpha, half_width).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = hyperbolicNet)]
pub fn hyperbolic_net_js(radius: f64, epsilon: f64, reach_factor: f64) -> Result<String, JsError> {
    hyperbolic_net(radius, epsilon, reach_factor).map_err(|e| JsError::new(&e))
}
