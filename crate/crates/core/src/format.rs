//! Deterministic text output: floats at 12 significant digits, JSON keys sorted.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Significant digits used for every float written by this crate.
pub const SIG_DIGITS: usize = 12;

/// Fixed-point decimals never exceed this, so values below ~1e-9 lose digits
/// instead of printing long runs of zeros.
const MAX_FIXED_DECIMALS: usize = 20;

fn decimal_exponent(x: f64, digits: usize) -> i32 {
    // `{:e}` rounds the mantissa first, so 9.9999999999996 correctly becomes 1e1
    let s = format!("{:.*e}", digits - 1, x.abs());
    s[s.find('e').unwrap() + 1..].parse().unwrap()
}

/// Positional notation with `digits` significant digits (`1.57079632679`).
pub fn fmt_fixed_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let e = decimal_exponent(x, digits);
    let decimals = (digits as i32 - 1 - e).clamp(0, MAX_FIXED_DECIMALS as i32) as usize;
    format!("{x:.decimals$}")
}

/// `%.12g`-style formatting: shortest of fixed or scientific, trailing zeros trimmed.
pub fn fmt_general_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let e = decimal_exponent(x, digits);
    if e < -5 || e >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = s.split_once('e').unwrap();
        let exp: i32 = exp.parse().unwrap();
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON with alphabetically ordered keys and floats at 12 significant digits.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_general_sig(n.as_f64().unwrap(), SIG_DIGITS));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // scalar arrays stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            // serde_json's default map is a BTreeMap, so iteration is already sorted
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(fmt_general_sig(1.0, 12), "1");
        assert_eq!(fmt_general_sig(0.5, 12), "0.5");
        assert_eq!(fmt_general_sig(std::f64::consts::PI, 12), "3.14159265359");
        assert_eq!(fmt_general_sig(-2.5e-7, 12), "-2.5e-07");
        assert_eq!(fmt_general_sig(1.234e15, 12), "1.234e+15");
        assert_eq!(fmt_general_sig(9.99999999999999, 12), "10");
        assert_eq!(fmt_general_sig(0.0, 12), "0");
    }

    #[test]
    fn fixed_format() {
        assert_eq!(fmt_fixed_sig(1.0, 12), "1.00000000000");
        assert_eq!(fmt_fixed_sig(0.5, 12), "0.500000000000");
        assert_eq!(fmt_fixed_sig(123.456, 12), "123.456000000");
        assert_eq!(fmt_fixed_sig(0.0, 12), "0.00000000000");
    }

    #[test]
    fn canonical_json_sorts_keys() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: Vec<f64>,
            mid: Option<u32>,
        }
        let s = to_canonical_json(&S {
            zeta: 1.0 / 3.0,
            alpha: vec![1.0, 2.5],
            mid: None,
        })
        .unwrap();
        assert_eq!(
            s,
            "{\n  \"alpha\": [1, 2.5],\n  \"mid\": null,\n  \"zeta\": 0.333333333333\n}\n"
        );
        let parsed: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["alpha"][1], 2.5);
    }
}
