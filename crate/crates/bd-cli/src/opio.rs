//! Operator matrix input.
//!
//! A matrix file is either CSV (one row per line, comma-separated entries,
//! `#` comments and blank lines skipped) or JSON (an array of arrays, or an
//! object with a `rows` field). Entries are decimals or `"p/q"` fractions;
//! both parse to exact rationals, so exact mode sees exactly what was
//! written. JSON numbers are taken at their binary-float value.

use std::path::Path;

use num_rational::BigRational;
use serde_json::Value;

use crate::config::parse_rational;
use crate::CliError;

/// Reads a matrix as rows of exact rationals. Shape checks (row count
/// against the stage dimension, ragged rows) are left to the operator
/// constructor.
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<BigRational>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read operator file {}: {e}", path.display()))
    })?;
    let trimmed = text.trim_start();
    let parsed = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        parse_json_matrix(&text)
    } else {
        parse_csv_matrix(&text)
    };
    parsed.map_err(|e| CliError::Usage(format!("operator file {}: {e}", path.display())))
}

fn parse_csv_matrix(text: &str) -> Result<Vec<Vec<BigRational>>, String> {
    let mut rows = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<BigRational>, String> = line
            .split(',')
            .map(|cell| {
                parse_rational(cell).map_err(|e| format!("line {}: {e}", lineno + 1))
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(String::from("no matrix rows found"));
    }
    Ok(rows)
}

fn parse_json_matrix(text: &str) -> Result<Vec<Vec<BigRational>>, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("bad JSON: {e}"))?;
    let rows_value = match &doc {
        Value::Array(_) => &doc,
        Value::Object(map) => map
            .get("rows")
            .ok_or_else(|| String::from("JSON operator object needs a \"rows\" field"))?,
        _ => return Err(String::from("JSON operator must be an array of arrays")),
    };
    let rows = rows_value
        .as_array()
        .ok_or_else(|| String::from("JSON operator must be an array of arrays"))?;
    if rows.is_empty() {
        return Err(String::from("no matrix rows found"));
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let cells = row
                .as_array()
                .ok_or_else(|| format!("row {} is not an array", r + 1))?;
            cells
                .iter()
                .map(|cell| {
                    entry_to_rational(cell).map_err(|e| format!("row {}: {e}", r + 1))
                })
                .collect()
        })
        .collect()
}

fn entry_to_rational(v: &Value) -> Result<BigRational, String> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(i.into()))
            } else {
                let f = n
                    .as_f64()
                    .ok_or_else(|| format!("cannot read number {n}"))?;
                BigRational::from_float(f).ok_or_else(|| format!("non-finite entry {f}"))
            }
        }
        Value::String(s) => parse_rational(s),
        other => Err(format!(
            "matrix entry must be a number or a \"p/q\" string, got {other}"
        )),
    }
}
