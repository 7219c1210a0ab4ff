//! WebAssembly bindings for the static page in `www/`.
//!
//! Every export takes plain numbers or comma lists and returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tablecount::counting::{
    bekessy_estimate, exact_count_dp, fisher_yates_count, lowrank_asymptotic_count,
    mc_estimate_count, sample_permanents, summarize, LowRankOptions,
};
use tablecount::permanent::DEFAULT_PERMANENT_LIMIT;
use tablecount::polynomial::{compositions, Monomial, DEFAULT_TERM_CAP};
use tablecount::symmetric_lowrank::{build_h_tilde, verify_coefficients};
use tablecount::{Margins, Scalar};

/// Keeps the page responsive: exact counts give up past this many states.
const EXACT_BUDGET: usize = 200_000;
/// Browser permanents stay small.
const PERMANENT_LIMIT: usize = 14;

fn parse(list: &str) -> Result<Vec<u32>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("`{s}` is not a count")))
        .collect()
}

fn margins(rows: &str, cols: &str) -> Result<Margins, String> {
    Margins::new(parse(rows)?, parse(cols)?).map_err(|e| e.to_string())
}

fn exact_value(m: &Margins) -> Option<f64> {
    exact_count_dp(m, EXACT_BUDGET)
        .ok()
        .map(|c| c.to_string().parse().unwrap_or(f64::INFINITY))
}

pub fn compare_json(rows: &str, cols: &str, samples: usize, forms: usize, seed: u64) -> Result<String, String> {
    let m = margins(rows, cols)?;
    let exact = exact_value(&m);
    let row = |method: &str, value: Result<f64, String>| -> Value {
        match value {
            Ok(v) => json!({
                "method": method,
                "value": v,
                "rel_error": exact.map(|e| (v / e - 1.0).abs()),
            }),
            Err(e) => json!({ "method": method, "error": e }),
        }
    };
    let mc = mc_estimate_count(&m, samples.max(2), seed, PERMANENT_LIMIT.min(DEFAULT_PERMANENT_LIMIT))
        .map_err(|e| e.to_string());
    let lowrank_opts = LowRankOptions {
        samples: Some(forms.max(1)),
        ..LowRankOptions::default()
    };
    let mut methods = vec![
        match exact {
            Some(v) => json!({ "method": "exact", "value": v, "rel_error": 0.0 }),
            None => json!({ "method": "exact", "error": "too large for the browser" }),
        },
        row("fy", Ok(fisher_yates_count(&m).to_f64())),
        row("bekessy", Ok(bekessy_estimate(&m))),
        row("montecarlo", mc.as_ref().map(|e| e.mean).map_err(Clone::clone)),
        row(
            "lowrank",
            lowrank_asymptotic_count(&m, 0.3, seed, &lowrank_opts)
                .map(|r| r.value)
                .map_err(|e| e.to_string()),
        ),
    ];
    if let (Ok(e), Some(obj)) = (&mc, methods[3].as_object_mut()) {
        obj.insert("ci".into(), json!([e.ci_low, e.ci_high]));
    }
    Ok(json!({ "total": m.total(), "methods": methods }).to_string())
}

pub fn h_tilde_json(r: u32, n: usize, epsilon: f64, samples: usize, seed: u64) -> Result<String, String> {
    if n == 0 || n > 12 || r == 0 || r > 6 {
        return Err("keep 1 <= r <= 6 and 1 <= n <= 12".into());
    }
    let h = build_h_tilde(r, n, epsilon, seed, Some(samples.max(1))).map_err(|e| e.to_string())?;
    let report = verify_coefficients(&h, DEFAULT_TERM_CAP).map_err(|e| e.to_string())?;
    let poly = h.expand(DEFAULT_TERM_CAP).map_err(|e| e.to_string())?;
    let coefficients: Vec<f64> = compositions(n, r)
        .into_iter()
        .map(|a| poly.coeff(&Monomial::new(a)))
        .collect();
    Ok(json!({
        "lower": report.lower,
        "upper": report.upper,
        "min_ratio": report.min_ratio,
        "max_ratio": report.max_ratio,
        "passed": report.passed(),
        "coefficients": coefficients,
    })
    .to_string())
}

pub fn convergence_json(rows: &str, cols: &str, samples: usize, seed: u64) -> Result<String, String> {
    let m = margins(rows, cols)?;
    let values = sample_permanents(&m, None, samples.max(2), seed, PERMANENT_LIMIT)
        .map_err(|e| e.to_string())?;
    let divisor = f64::from_biguint(&tablecount::counting::margin_factorials(&m));
    let mut points = Vec::new();
    let mut k = 2usize;
    while k <= values.len() {
        let e = summarize(&values[..k], divisor, seed);
        points.push(json!([k, e.mean, e.ci_low, e.ci_high]));
        let next = (k as f64 * 1.25).ceil() as usize;
        k = if k < values.len() { next.min(values.len()) } else { values.len() + 1 };
    }
    Ok(json!({ "exact": exact_value(&m), "points": points }).to_string())
}

/// Exact count, closed forms, Monte Carlo and low-rank estimates side by side.
#[wasm_bindgen]
pub fn compare_methods(rows: &str, cols: &str, samples: usize, forms: usize, seed: u64) -> Result<String, JsError> {
    compare_json(rows, cols, samples, forms, seed).map_err(|e| JsError::new(&e))
}

/// Coefficients of a sampled `h_r` approximation against the `(1 +- eps)^r` band.
#[wasm_bindgen]
pub fn h_tilde_band(r: u32, n: usize, epsilon: f64, samples: usize, seed: u64) -> Result<String, JsError> {
    h_tilde_json(r, n, epsilon, samples, seed).map_err(|e| JsError::new(&e))
}

/// Running Monte Carlo mean and 95% interval as samples accumulate.
#[wasm_bindgen]
pub fn mc_convergence(rows: &str, cols: &str, samples: usize, seed: u64) -> Result<String, JsError> {
    convergence_json(rows, cols, samples, seed).map_err(|e| JsError::new(&e))
}
