//! Result documents: one JSON (or CSV) report per experiment run, carrying
//! the echoed inputs, the measured outputs, and one pass/fail entry per
//! declared check. Identical configurations produce byte-identical output
//! except for the `timestamp` field; floats are serialized with 17
//! significant digits.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    /// `abs-lt` compares |measured| < threshold, `abs-gt` the opposite,
    /// `diff-lt` is used with `measured` already holding a difference.
    pub comparison: String,
    pub pass: bool,
}

impl Check {
    pub fn less(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold,
            comparison: "abs-lt".to_string(),
            pass: measured.abs() < threshold,
        }
    }

    pub fn greater(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold,
            comparison: "abs-gt".to_string(),
            pass: measured.abs() > threshold,
        }
    }

    pub fn within(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            measured: measured - expected,
            threshold: tolerance,
            comparison: "diff-lt".to_string(),
            pass: (measured - expected).abs() < tolerance,
        }
    }

    pub fn finite(name: &str, measured: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold: f64::MAX,
            comparison: "finite".to_string(),
            pass: measured.is_finite(),
        }
    }
}

/// Everything an experiment produces.
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// The full report document.
pub struct ResultDoc {
    pub experiment: String,
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub error: Option<(String, String)>,
    pub pass: bool,
}

impl ResultDoc {
    pub fn to_value(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| serde_json::to_value(c).expect("check serializes"))
            .collect();
        let mut doc = serde_json::Map::new();
        doc.insert("version".into(), Value::from(1u64));
        doc.insert("experiment".into(), Value::from(self.experiment.clone()));
        doc.insert("timestamp".into(), Value::from(self.timestamp));
        match self.seed {
            Some(s) => doc.insert("seed".into(), Value::from(s)),
            None => doc.insert("seed".into(), Value::Null),
        };
        doc.insert("inputs".into(), self.inputs.clone());
        doc.insert("results".into(), self.results.clone());
        doc.insert("checks".into(), Value::from(checks));
        if let Some((code, message)) = &self.error {
            let mut err = serde_json::Map::new();
            err.insert("code".into(), Value::from(code.clone()));
            err.insert("message".into(), Value::from(message.clone()));
            doc.insert("error".into(), Value::Object(err));
        }
        doc.insert("pass".into(), Value::from(self.pass));
        Value::Object(doc)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        write_value(&mut out, &self.to_value(), 0);
        out.push('\n');
        out
    }

    /// Uniform CSV layout: `kind,name,value,threshold,comparison,pass`.
    /// Scalar results are flattened with dotted/indexed names; checks carry
    /// their full entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("kind,name,value,threshold,comparison,pass\n");
        let _ = writeln!(out, "meta,experiment,{},,,", self.experiment);
        let _ = writeln!(out, "meta,timestamp,{},,,", self.timestamp);
        let _ = writeln!(out, "meta,pass,{},,,", self.pass);
        if let Some((code, _)) = &self.error {
            let _ = writeln!(out, "meta,error,{code},,,");
        }
        let mut rows = Vec::new();
        flatten("", &self.results, &mut rows);
        for (name, value) in rows {
            let _ = writeln!(out, "result,{name},{value},,,");
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check,{},{},{},{},{}",
                c.name,
                format_float(c.measured),
                format_float(c.threshold),
                c.comparison,
                c.pass
            );
        }
        out
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&name, v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        scalar => rows.push((prefix.to_string(), scalar_text(scalar))),
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                u.to_string()
            } else if let Some(i) = n.as_i64() {
                i.to_string()
            } else {
                format_float(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        _ => unreachable!(),
    }
}

/// Deterministic JSON printer: keys in sorted order (serde_json maps are
/// ordered), two-space indentation, floats as `{:.16e}`.
fn write_value(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                let _ = write!(out, "{}", format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            let _ = write!(out, "{}", serde_json::to_string(s).expect("string encodes"));
        }
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
                out.push('\n');
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                pad(out, indent + 1);
                let _ = write!(out, "{}: ", serde_json::to_string(k).expect("key encodes"));
                write_value(out, v, indent + 1);
            }
            out.push('\n');
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

/// Complex number as a two-entry object.
pub fn complex_value(v: num_complex::Complex64) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("re".into(), Value::from(v.re));
    map.insert("im".into(), Value::from(v.im));
    Value::Object(map)
}

/// Row-major complex matrix as nested `[re, im]` pairs.
pub fn matrix_value(m: &ndarray::Array2<num_complex::Complex64>) -> Value {
    let rows: Vec<Value> = m
        .outer_iter()
        .map(|row| {
            let entries: Vec<Value> =
                row.iter().map(|v| Value::from(vec![v.re, v.im])).collect();
            Value::from(entries)
        })
        .collect();
    Value::from(rows)
}
