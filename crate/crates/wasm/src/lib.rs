//! Browser bindings: the demo page feeds instance TOML in and gets the
//! JSON report, sweep figure data, or blocking cycles back as strings.
//!
//! The `*_impl` functions carry string errors so they stay testable on
//! native targets; the exported wrappers translate to `JsValue` only at
//! the boundary.

use wasm_bindgen::prelude::*;

use costab_core::report::{self, BetaSpec, SymbolicBeta};

fn parse(instance_toml: &str) -> Result<report::InstanceConfig, String> {
    report::parse_instance(instance_toml)
        .map(|loaded| loaded.config)
        .map_err(|e| e.to_string())
}

fn analyze_impl(instance_toml: &str) -> Result<String, String> {
    let config = parse(instance_toml)?;
    let report = report::run_analysis(&config).map_err(|e| e.to_string())?;
    Ok(report.to_json())
}

fn sweep_csv_impl(instance_toml: &str) -> Result<String, String> {
    let config = parse(instance_toml)?;
    let outcome = report::run_sweep(&config).map_err(|e| e.to_string())?;
    report::figure_csv(&outcome).map_err(|e| e.to_string())
}

fn blocking_cycles_impl(instance_toml: &str, beta: f64) -> Result<String, String> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err("beta must be finite and nonnegative".into());
    }
    let mut config = parse(instance_toml)?;
    config.checks.theory = false;
    config.checks.cycles = true;
    config.checks.cycle_betas = vec![beta];
    config.beta = BetaSpec::Symbolic(SymbolicBeta { symbolic: true });
    let report = report::run_analysis(&config).map_err(|e| e.to_string())?;
    let cycles = report.cycles.expect("cycles requested");
    serde_json::to_string_pretty(&cycles).map_err(|e| e.to_string())
}

/// Full stability analysis of one instance; returns the JSON report.
#[wasm_bindgen]
pub fn analyze(instance_toml: &str) -> Result<String, JsValue> {
    analyze_impl(instance_toml).map_err(|e| JsValue::from_str(&e))
}

/// Runs the instance's mu1 sweep and returns figure data as CSV.
#[wasm_bindgen]
pub fn sweep_csv(instance_toml: &str) -> Result<String, JsValue> {
    sweep_csv_impl(instance_toml).map_err(|e| JsValue::from_str(&e))
}

/// Blocking-graph cycles at one communication cost, as JSON.
#[wasm_bindgen]
pub fn blocking_cycles(instance_toml: &str, beta: f64) -> Result<String, JsValue> {
    blocking_cycles_impl(instance_toml, beta).map_err(|e| JsValue::from_str(&e))
}
