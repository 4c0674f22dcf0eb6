//! Number formatting shared by the JSON and CSV writers.

use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 15;

/// `v` rounded to 15 significant decimal digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest decimal form of `round_sig(v)`; scientific outside `[1e-5, 1e15)`.
pub fn fmt_num(v: f64) -> String {
    let r = round_sig(v);
    let a = r.abs();
    if r == 0.0 || !r.is_finite() || (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rounds every floating-point number in a JSON tree to 15 significant
/// digits. Integers are left alone.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(1.234e-12), "1.234e-12");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        let mut v = serde_json::json!({"a": [std::f64::consts::PI, 3], "b": 0.1});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[3.14159265358979,3],"b":0.1}"#);
    }
}
