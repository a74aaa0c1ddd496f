//! CSV, JSON and two-column emitters with fixed float formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Fixed 17-significant-digit formatting used by every artifact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    /// Whitespace-separated two-column text for gnuplot.
    Dat,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Dat => "dat",
        }
    }
}

/// Something a run writes to disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    /// Rows of scalar cells under a header. CSV or JSON (array of objects).
    Table { name: String, header: Vec<String>, rows: Vec<Vec<Value>> },
    /// Free-form JSON summary.
    Summary { name: String, value: Value },
    /// `(x, y)` pairs. CSV, JSON or two-column text.
    Curve { name: String, x: String, y: String, points: Vec<(f64, f64)> },
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Artifact::Table { name, .. } | Artifact::Summary { name, .. } | Artifact::Curve { name, .. } => name,
        }
    }

    pub fn supports(&self, format: Format) -> bool {
        match self {
            Artifact::Table { .. } => format != Format::Dat,
            Artifact::Summary { .. } => format == Format::Json,
            Artifact::Curve { .. } => true,
        }
    }

    pub fn table(name: impl Into<String>, header: &[&str], rows: Vec<Vec<Value>>) -> Self {
        Artifact::Table { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows }
    }

    pub fn summary<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let value = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Artifact::Summary { name: name.into(), value })
    }

    pub fn curve(name: impl Into<String>, x: &str, y: &str, points: Vec<(f64, f64)>) -> Self {
        Artifact::Curve { name: name.into(), x: x.into(), y: y.into(), points }
    }
}

/// Renders an artifact in one format.
pub fn render(artifact: &Artifact, format: Format) -> Result<String> {
    if !artifact.supports(format) {
        return Err(Error::Unsupported(format!("artifact {:?} has no {} form", artifact.name(), format.extension())));
    }
    Ok(match (artifact, format) {
        (Artifact::Table { header, rows, .. }, Format::Csv) => {
            let mut out = header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
            out.push('\n');
            for row in rows {
                out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
        (Artifact::Table { header, rows, .. }, Format::Json) => {
            let objects =
                rows.iter().map(|r| Value::Object(header.iter().cloned().zip(r.iter().cloned()).collect())).collect();
            json_string(&Value::Array(objects))
        }
        (Artifact::Summary { value, .. }, _) => json_string(value),
        (Artifact::Curve { x, y, points, .. }, Format::Csv) => {
            let mut out = format!("{},{}\n", csv_field(x), csv_field(y));
            for (a, b) in points {
                let _ = writeln!(out, "{},{}", num(*a), num(*b));
            }
            out
        }
        (Artifact::Curve { x, y, points, .. }, Format::Json) => {
            let pts = points.iter().map(|(a, b)| serde_json::json!({ x.as_str(): a, y.as_str(): b })).collect();
            json_string(&Value::Array(pts))
        }
        (Artifact::Curve { x, y, points, .. }, Format::Dat) => {
            let mut out = format!("# {x} {y}\n");
            for (a, b) in points {
                let _ = writeln!(out, "{} {}", num(*a), num(*b));
            }
            out
        }
        _ => unreachable!("pairing checked by supports"),
    })
}

/// Writes `dir/<name>.<ext>` and returns its path.
pub fn emit(artifact: &Artifact, format: Format, dir: &Path) -> Result<PathBuf> {
    let text = render(artifact, format)?;
    let path = dir.join(format!("{}.{}", artifact.name(), format.extension()));
    fs::write(&path, text)?;
    Ok(path)
}

fn num(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => number(n),
        Value::String(s) => csv_field(s),
        other => csv_field(&json_compact(other)),
    }
}

fn number(n: &serde_json::Number) -> String {
    if let Some(i) = n.as_i64() {
        i.to_string()
    } else if let Some(u) = n.as_u64() {
        u.to_string()
    } else {
        fmt_f64(n.as_f64().unwrap_or(f64::NAN))
    }
}

fn json_compact(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, None, 0, &mut out);
    out
}

/// Pretty JSON with sorted keys and 17-digit floats.
pub fn json_string(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, Some(2), 0, &mut out);
    out.push('\n');
    out
}

fn write_json(v: &Value, indent: Option<usize>, depth: usize, out: &mut String) {
    let newline = |out: &mut String, depth: usize| {
        if let Some(w) = indent {
            out.push('\n');
            out.push_str(&" ".repeat(w * depth));
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_json(item, indent, depth + 1, out);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(if indent.is_some() { ": " } else { ":" });
                write_json(&map[*k], indent, depth + 1, out);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_keys_sorted_and_floats_fixed() {
        let text = json_string(&json!({"b": 0.1, "a": [1, 2.5], "c": null}));
        assert_eq!(
            text,
            "{\n  \"a\": [\n    1,\n    2.5000000000000000e0\n  ],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": null\n}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_quotes_and_curves() {
        let t = Artifact::table("t", &["name", "x"], vec![vec![json!("a,b"), json!(0.5)]]);
        assert_eq!(render(&t, Format::Csv).unwrap(), "name,x\n\"a,b\",5.0000000000000000e-1\n");
        let c = Artifact::curve("c", "epsilon", "fraction", vec![(1.0, 0.25)]);
        assert_eq!(
            render(&c, Format::Dat).unwrap(),
            "# epsilon fraction\n1.0000000000000000e0 2.5000000000000000e-1\n"
        );
    }

    #[test]
    fn unsupported_pairing_names_artifact() {
        let s = Artifact::summary("report", &json!({})).unwrap();
        let err = render(&s, Format::Csv).unwrap_err().to_string();
        assert!(err.contains("report") && err.contains("csv"), "{err}");
    }
}
