//! Deterministic report rendering.
//!
//! Floats are re-rounded to 12 significant digits before printing so the
//! emitted text never depends on anything but the computed values; rationals
//! print exactly as `p/q`. JSON objects serialize with sorted keys, so equal
//! reports are equal bytes.

use bd_core::Scalar;
use serde_json::Value;

/// Rounds to 12 significant digits (the printing precision for floats).
/// `-0.0` normalizes to `0.0`; non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// JSON value for a float at reporting precision. Non-finite values become
/// strings, since JSON has no representation for them.
pub fn f64_value(x: f64) -> Value {
    let rounded = sig12(x);
    match serde_json::Number::from_f64(rounded) {
        Some(n) => Value::Number(n),
        None => Value::String(format!("{x}")),
    }
}

/// CSV cell for a float at reporting precision.
pub fn f64_cell(x: f64) -> String {
    format!("{}", sig12(x))
}

/// JSON value for a computation scalar: exact `"p/q"` string in rational
/// mode, rounded number in float mode.
pub fn scalar_value<S: Scalar>(v: &S) -> Value {
    if S::EXACT {
        Value::String(format!("{v}"))
    } else {
        f64_value(Scalar::to_f64(v))
    }
}

/// CSV cell for a computation scalar (same convention as [`scalar_value`]).
pub fn scalar_cell<S: Scalar>(v: &S) -> String {
    if S::EXACT {
        format!("{v}")
    } else {
        f64_cell(Scalar::to_f64(v))
    }
}

/// Pretty-printed JSON document, newline-terminated.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values are always serializable");
    s.push('\n');
    s
}

/// CSV document: a header line plus one line per row, newline-terminated.
pub fn render_csv(header: &str, rows: &[Vec<String>]) -> String {
    let mut s = String::with_capacity(header.len() + rows.len() * 16 + 1);
    s.push_str(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn sig12_rounds_to_twelve_digits() {
        let third = 1.0 / 3.0;
        assert_eq!(format!("{}", sig12(third)), "0.333333333333");
        assert_eq!(sig12(0.97), 0.97);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(-0.0), 0.0);
        assert_eq!(format!("{}", sig12(123456789.123456789)), "123456789.123");
    }

    #[test]
    fn scalar_values_follow_the_mode() {
        let r = BigRational::new(BigInt::from(97), BigInt::from(100));
        assert_eq!(scalar_value(&r), Value::String(String::from("97/100")));
        assert_eq!(scalar_cell(&r), "97/100");
        assert_eq!(f64_cell(0.5), "0.5");
        assert_eq!(scalar_value(&0.97f64), serde_json::json!(0.97));
    }

    #[test]
    fn csv_rendering_is_line_per_row() {
        let doc = render_csv(
            "n,norm",
            &[
                vec![String::from("1"), String::from("1")],
                vec![String::from("2"), String::from("1.41421356237")],
            ],
        );
        assert_eq!(doc, "n,norm\n1,1\n2,1.41421356237\n");
    }
}
