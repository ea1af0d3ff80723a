//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export takes scenario text, so the page can rebuild the scenario
//! from its sliders and call straight in. The plain functions return
//! `Result<String, String>` and are what the native tests exercise.

use hardchoice::ensemble::{classification_matrix, small_improvement_test, Side, SmallImprovementOutcome};
use hardchoice::harness::format::{parse_scenario, serialize_scenario};
use hardchoice::harness::plot::emit_plot;
use hardchoice::harness::report::{render_matrix, OutputFormat};
use hardchoice::harness::{canonical_scenario, Scenario};
use hardchoice::resolution::resolve_by_transformation;
use wasm_bindgen::prelude::*;

fn load(text: &str) -> Result<Scenario, String> {
    parse_scenario(text).map_err(|e| e.to_string())
}

pub fn canonical_text() -> String {
    serialize_scenario(&canonical_scenario())
}

pub fn classify_text(scenario: &str) -> Result<String, String> {
    let s = load(scenario)?;
    let m = classification_matrix(&s.jury, &s.problem).map_err(|e| e.to_string())?;
    Ok(render_matrix(&m, OutputFormat::Table))
}

/// Indifference curves for the pair; with a target (`first` or `second`)
/// the opposing jurors are transformed and shown in a second panel.
pub fn plot_text(scenario: &str, a: &str, b: &str, target: &str, margin: f64) -> Result<String, String> {
    let s = load(scenario)?;
    let transformed = match target {
        "" | "none" => None,
        t => {
            let side = match t {
                "first" => Side::First,
                "second" => Side::Second,
                other => return Err(format!("unknown target `{other}`")),
            };
            let oa = s.problem.option(a).map_err(|e| e.to_string())?;
            let ob = s.problem.option(b).map_err(|e| e.to_string())?;
            let report =
                resolve_by_transformation(&s.jury, oa, ob, side, margin).map_err(|e| e.to_string())?;
            Some(report.jury_after)
        }
    };
    emit_plot(&s, a, b, transformed.as_ref()).map_err(|e| e.to_string())
}

pub fn sift_text(scenario: &str, a: &str, b: &str, delta: f64) -> Result<String, String> {
    let s = load(scenario)?;
    let oa = s.problem.option(a).map_err(|e| e.to_string())?;
    let ob = s.problem.option(b).map_err(|e| e.to_string())?;
    let out = small_improvement_test(&s.jury, &s.problem, oa, ob, delta).map_err(|e| e.to_string())?;
    Ok(match out {
        SmallImprovementOutcome::ConfirmedIncommensurable => "confirmed incommensurable".to_string(),
        SmallImprovementOutcome::NotConfirmed(reason) => format!("not confirmed: {reason}"),
    })
}

#[wasm_bindgen(js_name = canonicalScenario)]
pub fn canonical_scenario_js() -> String {
    canonical_text()
}

#[wasm_bindgen]
pub fn classify(scenario: &str) -> Result<String, JsValue> {
    classify_text(scenario).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn plot(scenario: &str, a: &str, b: &str, target: &str, margin: f64) -> Result<String, JsValue> {
    plot_text(scenario, a, b, target, margin).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sift(scenario: &str, a: &str, b: &str, delta: f64) -> Result<String, JsValue> {
    sift_text(scenario, a, b, delta).map_err(|e| JsValue::from_str(&e))
}
