//! WebAssembly bindings for the browser demo in `www/`. Every export returns a
//! JSON string; the plain Rust versions are kept separate so they run natively.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use toeplitz_lowrank::filters::build_filter_h;
use toeplitz_lowrank::recovery::lowrank;
use toeplitz_lowrank::sfft::{sparse_recover, RecoveryConfig};
use toeplitz_lowrank::toeplitz::{cis, frobenius_from_column, EntryOracle, FourierToeplitz, SymToeplitz};
use toeplitz_lowrank::Result;
use wasm_bindgen::prelude::*;

/// Taper values at `points` evenly spaced times covering `[-d/2, 3d/2)`.
pub fn filter_response_json(k: usize, delta: f64, d: usize, points: usize) -> Result<String> {
    let h = build_filter_h(k, delta, d)?;
    let points = points.clamp(2, 4096) as i64;
    let span = 2 * d as i64;
    let (times, values): (Vec<i64>, Vec<f64>) = (0..points)
        .map(|i| {
            let t = -(d as i64) / 2 + i * span / points;
            (t, h.eval(t))
        })
        .unzip();
    Ok(json!({ "params": h.params(), "times": times, "values": values }).to_string())
}

/// Unit tones at `freqs` plus uniform complex noise carrying `noise` times
/// the signal energy, then sparse recovery.
pub fn recover_tones_json(d: usize, freqs: &[f64], noise: f64, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // uniform on [-1/2, 1/2]² has variance 1/6
    let scale = (6.0 * noise.max(0.0) * freqs.len() as f64).sqrt();
    let x: Vec<Complex64> = (0..d)
        .map(|t| {
            let tone: Complex64 = freqs.iter().map(|f| cis(f * t as f64)).sum();
            let n = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            tone + n * scale
        })
        .collect();
    let cfg = RecoveryConfig::new(freqs.len().max(1), 1e-2, d);
    let list = sparse_recover(&x, &cfg, &mut rng)?;
    let n = freqs.len().min(list.freqs.len());
    Ok(json!({
        "planted": freqs,
        "recovered": &list.freqs[..n],
        "energy": &list.energy[..n],
        "candidates": list.freqs.len(),
        "reads": list.reads,
    })
    .to_string())
}

/// Random rank-`k` PSD Toeplitz matrix plus `noise·I`, fitted from entry queries.
pub fn lowrank_demo_json(d: usize, k: usize, noise: f64, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = k.div_ceil(2).max(1);
    let mut freqs = Vec::with_capacity(2 * pairs);
    let mut weights = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let f = rng.random_range(0.02..0.48);
        let w = rng.random_range(0.5..2.0);
        freqs.extend([f, 1.0 - f]);
        weights.extend([w, w]);
    }
    let planted = FourierToeplitz::new(d, freqs.clone(), weights)?;
    let mut col = planted.first_column();
    col[0] += noise.max(0.0);
    let t = SymToeplitz::new(col)?;
    let oracle = EntryOracle::from_toeplitz(&t);
    let r = lowrank(&oracle, 2 * pairs, 1e-2, &Default::default(), &mut rng)?;
    let mut order: Vec<usize> = (0..r.output.freqs.len()).collect();
    order.sort_by(|&a, &b| r.output.weights[b].total_cmp(&r.output.weights[a]));
    order.truncate(freqs.len());
    order.sort_by(|&a, &b| r.output.freqs[a].total_cmp(&r.output.freqs[b]));
    let diff: Vec<f64> = r.output.first_column().iter().zip(t.col()).map(|(a, b)| a - b).collect();
    Ok(json!({
        "planted": freqs,
        "recovered": order.iter().map(|&i| r.output.freqs[i]).collect::<Vec<_>>(),
        "weights": order.iter().map(|&i| r.output.weights[i]).collect::<Vec<_>>(),
        "model_size": r.output.freqs.len(),
        "error_rel": frobenius_from_column(&diff) / t.frobenius(),
        "queries": r.queries_used,
        "entries": d * d,
        "degraded": r.degraded,
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn filter_response(k: usize, delta: f64, d: usize, points: usize) -> std::result::Result<String, JsError> {
    js(filter_response_json(k, delta, d, points))
}

#[wasm_bindgen]
pub fn recover_tones(d: usize, freqs: &[f64], noise: f64, seed: u64) -> std::result::Result<String, JsError> {
    js(recover_tones_json(d, freqs, noise, seed))
}

#[wasm_bindgen]
pub fn lowrank_demo(d: usize, k: usize, noise: f64, seed: u64) -> std::result::Result<String, JsError> {
    js(lowrank_demo_json(d, k, noise, seed))
}
