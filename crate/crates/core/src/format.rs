//! Byte-stable JSON output.
//!
//! Every JSON file written by this crate goes through [`to_stable_json`]: object
//! keys come out sorted and every float is rounded to 9 significant digits before
//! being printed in its shortest form, so identical inputs always produce
//! identical bytes.

use serde::Serialize;
use serde_json::Value;

/// Significant digits kept for floats in JSON output.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Round `x` to [`SIGNIFICANT_DIGITS`] significant digits. Negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let r: f64 = s.parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or_default();
                serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        // serde_json's default map is a BTreeMap, so keys are already sorted.
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

/// Serialize to pretty JSON with sorted keys and 9-significant-digit floats.
/// A trailing newline is appended.
pub fn to_stable_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let v = normalize(serde_json::to_value(value)?);
    let mut out = serde_json::to_string_pretty(&v)?;
    out.push('\n');
    Ok(out)
}
