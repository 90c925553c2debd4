//! Deterministic rendering of reports.

use serde_json::{Map, Value};

/// Rounds to 12 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::String("NaN".into());
    }
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "Infinity" } else { "-Infinity" }.into());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// 12-significant-digit text for CSV cells.
pub fn num_text(x: f64) -> String {
    match num(x) {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s,
        _ => String::new(),
    }
}

/// Adds `"schema": 1` and pretty-prints with sorted keys.
pub fn render_json(mut body: Map<String, Value>) -> String {
    body.insert("schema".into(), Value::from(1));
    let mut s = serde_json::to_string_pretty(&Value::Object(body)).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_rounding() {
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(num(2f64.sqrt()).to_string(), "1.41421356237");
        assert_eq!(num(f64::INFINITY), Value::String("Infinity".into()));
        assert_eq!(num_text(0.5), "0.5");
    }

    #[test]
    fn json_keys_sorted_with_schema() {
        let mut m = Map::new();
        m.insert("zeta".into(), Value::from(1));
        m.insert("alpha".into(), Value::from(2));
        let s = render_json(m);
        let (a, z, sc) = (s.find("alpha").unwrap(), s.find("zeta").unwrap(), s.find("schema").unwrap());
        assert!(a < sc && sc < z);
    }
}
