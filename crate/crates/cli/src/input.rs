//! Instance loading: files, stdin, inline JSON and the built-in names.

use std::fs;
use std::io::Read;

use affine_games::multi_period::naive_counterexample;
use affine_games::redistribution::grg_demo;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::CliError;

/// Resolves `--input` into a JSON document.
pub fn load(source: Option<&str>) -> Result<Value, CliError> {
    let source = source.ok_or_else(|| CliError::Malformed("--input is required".into()))?;
    let text = match source.trim() {
        "paper-counterexample" => return Ok(serde_json::to_value(naive_counterexample()).expect("tree serializes")),
        "grg-demo" => {
            let (x, p, alpha) = grg_demo();
            return Ok(json!({ "X": x, "P": p, "alpha": alpha }));
        }
        "-" => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Malformed(format!("stdin: {e}")))?;
            buf
        }
        s if s.starts_with('{') => s.to_string(),
        path => fs::read_to_string(path).map_err(|e| CliError::Malformed(format!("{path}: {e}")))?,
    };
    serde_json::from_str(&text).map_err(|e| CliError::Malformed(format!("invalid JSON: {e}")))
}

pub fn parse<T: DeserializeOwned>(doc: &Value, what: &str) -> Result<T, CliError> {
    T::deserialize(doc).map_err(|e| CliError::Malformed(format!("not a valid {what}: {e}")))
}

/// Parses a comma separated list of player indices.
pub fn coalition(list: &str) -> Result<Vec<usize>, CliError> {
    let mut out: Vec<usize> = list
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Malformed(format!("--coalition: {e}")))?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
