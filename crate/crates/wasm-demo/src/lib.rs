//! Browser bindings for the affine game solvers.
//!
//! Each exported function takes and returns JSON strings. The plain Rust
//! functions in [`ops`] do the work so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod ops;

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Solves a game `{"X", "P", "G"}` and returns the payoff of every profile
/// together with the Nash payoff.
#[wasm_bindgen(js_name = solveGame)]
pub fn solve_game(json: &str, tolerance: f64) -> Result<String, JsValue> {
    to_js(ops::solve_game(json, tolerance))
}

/// Classifies a matrix given as `{"rows": ...}` or `{"alpha": ...}`.
#[wasm_bindgen(js_name = classifyMatrix)]
pub fn classify_matrix(json: &str, tolerance: f64) -> Result<String, JsValue> {
    to_js(ops::classify_matrix(json, tolerance))
}

/// Generates a seeded binary scenario tree and solves it.
#[wasm_bindgen(js_name = solveRandomTree)]
pub fn solve_random_tree(seed: u32, players: u32, horizon: u32, tolerance: f64) -> Result<String, JsValue> {
    to_js(ops::solve_random_tree(seed as u64, players as usize, horizon as usize, tolerance))
}
