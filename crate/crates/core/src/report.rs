//! Canonical JSON for reports: sorted keys, floats with 17 significant
//! digits, so equal inputs give byte-identical output.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::Result;

struct Canonical;

impl Formatter for Canonical {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `1.2345678901234567e-3` style: 17 significant digits, round-trip exact.
pub fn format_f64(value: f64) -> String {
    if value == 0.0 {
        // Drop the sign of -0.0.
        return "0.0000000000000000e0".into();
    }
    format!("{value:.16e}")
}

/// Converts to a JSON tree; object keys end up sorted.
pub fn to_value<T: Serialize>(report: &T) -> Result<Value> {
    Ok(serde_json::to_value(report)?)
}

pub fn to_canonical_json<T: Serialize>(report: &T) -> Result<String> {
    let value = to_value(report)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// One `(path, value)` pair per scalar leaf, paths joined with `.`,
/// array positions as indices. Null leaves are kept as empty values.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    walk(value, String::new(), &mut rows);
    rows
}

fn walk(value: &Value, path: String, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if path.is_empty() {
            key.to_string()
        } else {
            format!("{path}.{key}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                walk(v, join(k), rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                walk(v, join(&i.to_string()), rows);
            }
        }
        Value::Null => rows.push((path, String::new())),
        Value::Bool(b) => rows.push((path, b.to_string())),
        Value::String(s) => rows.push((path, s.clone())),
        Value::Number(n) => {
            let text = if n.is_f64() {
                format_f64(n.as_f64().expect("f64"))
            } else {
                n.to_string()
            };
            rows.push((path, text));
        }
    }
}
