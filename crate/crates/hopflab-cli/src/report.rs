//! Deterministic report rendering. Reports are a small JSON-like value tree;
//! the JSON form is canonical (object keys sorted, floats printed with 17
//! significant digits, arrays in a fixed order), so equal measurements always
//! produce byte-identical files. The markdown form is a human-readable view
//! of the same tree.

use std::fmt::Write as _;

/// Report tree. Integers and floats are kept apart so that counts render as
/// plain integers while every measured quantity keeps full precision.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Value>),
    Obj(Vec<(String, Value)>),
}

impl Value {
    pub fn get(&self, key: &str) -> Option<&Value> {
        match self {
            Value::Obj(pairs) => pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_arr(&self) -> Option<&[Value]> {
        match self {
            Value::Arr(items) => Some(items),
            _ => None,
        }
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn escape_into(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    const STEP: &str = "  ";
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Num(x) => out.push_str(&fmt_float(*x)),
        Value::Str(s) => escape_into(out, s),
        Value::Arr(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&STEP.repeat(indent + 1));
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&STEP.repeat(indent));
            out.push(']');
        }
        Value::Obj(pairs) => {
            if pairs.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut sorted: Vec<&(String, Value)> = pairs.iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            out.push('{');
            for (i, (key, item)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&STEP.repeat(indent + 1));
                escape_into(out, key);
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&STEP.repeat(indent));
            out.push('}');
        }
    }
}

/// Canonical JSON: sorted keys, 17-significant-digit floats, a trailing
/// newline, and nothing run-dependent.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn from_serde(value: &serde_json::Value) -> Value {
    match value {
        serde_json::Value::Null => Value::Null,
        serde_json::Value::Bool(b) => Value::Bool(*b),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Value::Int(i)
            } else {
                Value::Num(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        serde_json::Value::String(s) => Value::Str(s.clone()),
        serde_json::Value::Array(items) => Value::Arr(items.iter().map(from_serde).collect()),
        serde_json::Value::Object(map) => Value::Obj(
            map.iter()
                .map(|(k, v)| (k.clone(), from_serde(v)))
                .collect(),
        ),
    }
}

/// Parses a JSON report back into the value tree. Integer-syntax numbers
/// come back as `Int`, everything else as `Num`, so a parse-and-render
/// round trip reproduces the canonical bytes.
pub fn parse_json(text: &str) -> Result<Value, String> {
    let parsed: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("report is not valid JSON: {e}"))?;
    Ok(from_serde(&parsed))
}

fn md_scalar(value: &Value) -> String {
    match value {
        Value::Null => "-".to_string(),
        Value::Bool(b) => if *b { "yes" } else { "no" }.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Num(x) => fmt_float(*x),
        Value::Str(s) => s.clone(),
        Value::Arr(_) | Value::Obj(_) => "(nested)".to_string(),
    }
}

fn md_details(details: &Value) -> String {
    let Value::Obj(pairs) = details else {
        return md_scalar(details);
    };
    let mut sorted: Vec<&(String, Value)> = pairs.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    sorted
        .iter()
        .map(|(k, v)| format!("{k} = {}", md_details(v)))
        .collect::<Vec<_>>()
        .join("; ")
}

fn push_family(out: &mut String, family: &Value) {
    let id = family
        .get("family")
        .and_then(Value::as_str)
        .unwrap_or("(unnamed)");
    let _ = writeln!(out, "## {id}\n");
    for (label, key) in [
        ("epsilon", "epsilon"),
        ("classification", "classification"),
        ("prediction", "prediction"),
    ] {
        if let Some(v) = family.get(key) {
            match v {
                Value::Obj(_) => {
                    let _ = writeln!(out, "- {label}: {}", md_details(v));
                }
                other => {
                    let _ = writeln!(out, "- {label}: {}", md_scalar(other));
                }
            }
        }
    }
    if let Some(mu) = family.get("mu") {
        let _ = writeln!(out, "- mu: {}", md_details(mu));
    }
    out.push('\n');
    if let Some(rows) = family.get("spectrum").and_then(Value::as_arr) {
        if !rows.is_empty() {
            out.push_str(
                "| eigenvalue | algebraic | geometric | predicted value | predicted multiplicity |\n",
            );
            out.push_str("| --- | --- | --- | --- | --- |\n");
            for row in rows {
                let cell = |key: &str| row.get(key).map(md_scalar).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    cell("value"),
                    cell("algebraic"),
                    cell("geometric"),
                    cell("predicted_value"),
                    cell("predicted_multiplicity"),
                );
            }
            out.push('\n');
        }
    }
    if let Some(Value::Obj(pairs)) = family.get("residuals") {
        let mut sorted: Vec<&(String, Value)> = pairs.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        out.push_str("| residual | value |\n| --- | --- |\n");
        for (key, v) in sorted {
            let _ = writeln!(out, "| {key} | {} |", md_scalar(v));
        }
        out.push('\n');
    }
}

/// Renders the report tree as markdown: suite metadata, the criteria table,
/// then one section per family with its spectral and residual tables.
pub fn render_markdown(report: &Value) -> String {
    let mut out = String::new();
    out.push_str("# hopflab verification report\n\n");
    if let Some(meta) = report.get("meta") {
        for key in ["n", "p", "samples", "seed"] {
            if let Some(v) = meta.get(key) {
                let _ = writeln!(out, "- {key}: {}", md_scalar(v));
            }
        }
        if let Some(versions) = meta.get("versions") {
            let _ = writeln!(out, "- versions: {}", md_details(versions));
        }
        if let Some(tols) = meta.get("tolerances") {
            let _ = writeln!(out, "- tolerances: {}", md_details(tols));
        }
    }
    if let Some(passed) = report.get("passed").and_then(Value::as_bool) {
        let _ = writeln!(out, "- all criteria passed: {}", if passed { "yes" } else { "no" });
    }
    out.push('\n');
    if let Some(criteria) = report.get("criteria").and_then(Value::as_arr) {
        out.push_str("## criteria\n\n| criterion | passed | details |\n| --- | --- | --- |\n");
        for entry in criteria {
            let name = entry.get("name").and_then(Value::as_str).unwrap_or("?");
            let passed = entry
                .get("passed")
                .and_then(Value::as_bool)
                .map(|b| if b { "yes" } else { "no" })
                .unwrap_or("?");
            let details = entry.get("details").map(md_details).unwrap_or_default();
            let _ = writeln!(out, "| {name} | {passed} | {details} |");
        }
        out.push('\n');
    }
    if let Some(families) = report.get("families").and_then(Value::as_arr) {
        for family in families {
            push_family(&mut out, family);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Value {
        Value::Obj(vec![
            ("zeta".into(), Value::Num(0.5)),
            ("alpha".into(), Value::Int(3)),
            (
                "list".into(),
                Value::Arr(vec![Value::Bool(true), Value::Null, Value::Str("a\"b".into())]),
            ),
        ])
    }

    #[test]
    fn json_sorts_keys_and_formats_floats() {
        let text = render_json(&sample());
        let alpha = text.find("\"alpha\"").unwrap();
        let list = text.find("\"list\"").unwrap();
        let zeta = text.find("\"zeta\"").unwrap();
        assert!(alpha < list && list < zeta);
        assert!(text.contains("5.0000000000000000e-1"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn json_round_trips_byte_for_byte() {
        let text = render_json(&sample());
        let reparsed = parse_json(&text).unwrap();
        assert_eq!(render_json(&reparsed), text);

        // Values that are not exactly representable need all 17 significant
        // digits and a correctly rounded parse to survive unchanged.
        let hard = Value::Arr(vec![
            Value::Num(1e-6),
            Value::Num(0.1 + 0.2),
            Value::Num(core::f64::consts::PI),
            Value::Num(1.9999976258947962),
            Value::Num(f64::MIN_POSITIVE),
        ]);
        let text = render_json(&hard);
        let reparsed = parse_json(&text).unwrap();
        assert_eq!(render_json(&reparsed), text);
    }

    #[test]
    fn round_trip_keeps_integers_and_floats_apart() {
        let reparsed = parse_json("{\"count\": 4, \"value\": 4.0}").unwrap();
        assert_eq!(reparsed.get("count"), Some(&Value::Int(4)));
        assert_eq!(reparsed.get("value"), Some(&Value::Num(4.0)));
    }

    #[test]
    fn markdown_renders_family_tables() {
        let report = Value::Obj(vec![
            ("passed".into(), Value::Bool(true)),
            (
                "families".into(),
                Value::Arr(vec![Value::Obj(vec![
                    ("family".into(), Value::Str("type_b(t=4)".into())),
                    (
                        "spectrum".into(),
                        Value::Arr(vec![Value::Obj(vec![
                            ("value".into(), Value::Num(3.0f64.sqrt())),
                            ("algebraic".into(), Value::Int(4)),
                            ("geometric".into(), Value::Int(4)),
                        ])]),
                    ),
                ])]),
            ),
        ]);
        let text = render_markdown(&report);
        assert!(text.contains("## type_b(t=4)"));
        assert!(text.contains(&fmt_float(3.0f64.sqrt())));
        assert!(text.contains("| 4 | 4 |"));
    }
}
