//! WebAssembly bindings for the browser demo in `www/`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sliding_opt::harness::{self, Method, RunConfig};
use sliding_opt::network::{Graph, Laplacian, Topology};
use sliding_opt::oracles::{NoiseKind, NoiseModel, NoisyZeroOrderOracle, SmoothingEstimator};
use sliding_opt::rng::{stream, Stream};
use sliding_opt::trace::TraceRow;
use sliding_opt::NormPair;

#[derive(Serialize)]
struct Series {
    method: String,
    points: Vec<TraceRow>,
}

#[derive(Serialize)]
struct Spectrum {
    topology: String,
    m: usize,
    eigenvalues: Vec<f64>,
    lambda_max: f64,
    lambda_min_plus: f64,
    chi: f64,
}

#[derive(Serialize)]
struct ProfilePoint {
    t: f64,
    f: f64,
    smoothed: f64,
    stderr: f64,
}

fn to_js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Runs each method in `methods` (comma separated) on the config text and
/// returns their traces as JSON.
pub fn comparison_json(config: &str, methods: &str) -> Result<String, String> {
    let base = RunConfig::from_text(config).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let reference = harness::compute_reference(&base).map_err(|e| e.to_string())?;
    for name in methods.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mut cfg = base.clone();
        cfg.method = name.parse::<Method>().map_err(|e| e.to_string())?;
        let report = harness::run_with(&cfg, Some(&reference), false).map_err(|e| e.to_string())?;
        out.push(Series {
            method: cfg.method.to_string(),
            points: report.trace.rows,
        });
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn spectrum_json(topology: &str, m: usize) -> Result<String, String> {
    let t: Topology = topology.parse().map_err(|e: sliding_opt::Error| e.to_string())?;
    let g = Graph::build(t, m).map_err(|e| e.to_string())?;
    let lap = Laplacian::build(&g).map_err(|e| e.to_string())?;
    serde_json::to_string(&Spectrum {
        topology: t.to_string(),
        m,
        eigenvalues: lap.eigenvalues.iter().map(|v| v.max(0.0)).collect(),
        lambda_max: lap.lambda_max,
        lambda_min_plus: lap.lambda_min_plus,
        chi: lap.chi,
    })
    .map_err(|e| e.to_string())
}

/// `f(x) = ‖x‖₂` in 2-D and its sphere smoothing with radius r, sampled
/// along the segment from (−1, 0) to (1, 0).
pub fn smoothing_json(r: f64, samples: usize, seed: u64) -> Result<String, String> {
    let f = std::sync::Arc::new(|x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt());
    let noise = NoiseModel::new(NoiseKind::Zero, stream(seed, Stream::Noise)).map_err(|e| e.to_string())?;
    let oracle = NoisyZeroOrderOracle::new(f.clone(), noise, 1.0, r * 1.000001).map_err(|e| e.to_string())?;
    let est = SmoothingEstimator::new(oracle, r, 2, NormPair::euclidean(), None, stream(seed, Stream::Sphere))
        .map_err(|e| e.to_string())?;
    let mut rng = stream(seed, Stream::Stochastic);
    let mut points = Vec::new();
    for i in 0..=40 {
        let t = -1.0 + 2.0 * i as f64 / 40.0;
        let x = [t, 0.0];
        let mc = est.smoothed_value(&x, samples.max(2), &mut rng).map_err(|e| e.to_string())?;
        points.push(ProfilePoint {
            t,
            f: f(&x),
            smoothed: mc.mean,
            stderr: mc.stderr,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn run_comparison(config: &str, methods: &str) -> Result<String, JsValue> {
    comparison_json(config, methods).map_err(to_js)
}

#[wasm_bindgen]
pub fn graph_spectrum(topology: &str, m: usize) -> Result<String, JsValue> {
    spectrum_json(topology, m).map_err(to_js)
}

#[wasm_bindgen]
pub fn smoothing_profile(r: f64, samples: usize, seed: u64) -> Result<String, JsValue> {
    smoothing_json(r, samples, seed).map_err(to_js)
}
