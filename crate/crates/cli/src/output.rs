use serde::Serialize;
use serde_json::Value;
use std::fmt::Write;

/// A float with 17 significant digits, so that parsing it back gives the same double.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    if !v.is_finite() {
        return "null".into();
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..17).contains(&e) {
        let decimals = (16 - e).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.16e}")
    }
}

/// Pretty JSON in which every floating value carries 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&num(n.as_f64().expect("f64")));
            } else {
                write!(out, "{n}").expect("write to string");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 2.0 / 3.0, 1e-300, 6.02214076e23, -1.5, 123456.789, 2f64.sqrt() * 1e-6] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits = s.trim_start_matches('-').split(['e']).next().unwrap().replace('.', "");
            assert_eq!(digits.trim_start_matches('0').len(), 17, "{s}");
        }
    }

    #[test]
    fn json_is_parseable() {
        let v = serde_json::json!({"a": [1, 2.5, null], "b": {"c": 0.1}, "d": "x\"y"});
        let s = to_json(&v);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
