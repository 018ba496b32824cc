//! Report emission: canonical JSON (sorted keys, 12 significant digits) and
//! plain-text tables.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

/// C's `%.12g`.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n("  ", k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_g(n.as_f64().expect("f64")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

pub fn to_canonical<T: Serialize>(x: &T) -> Result<String> {
    Ok(canonical_json(&serde_json::to_value(x)?))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => fmt_g(n.as_f64().expect("f64")),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            format!("[{}]", a.iter().map(cell).collect::<Vec<_>>().join(","))
        }
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Rows from objects, one column per header key.
    pub fn from_objects(headers: &[&str], items: &[Value]) -> Self {
        let mut t = Table::new(headers);
        for it in items {
            t.rows.push(headers.iter().map(|h| it.get(*h).map(cell).unwrap_or_default()).collect());
        }
        t
    }

    pub fn render(&self) -> String {
        let mut w: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                w[i] = w[i].max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let s: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<width$}", width = w[i])).collect();
            let _ = writeln!(out, "{}", s.join("  ").trim_end());
        };
        line(&mut out, &self.headers);
        let rule: Vec<String> = w.iter().map(|&k| "-".repeat(k)).collect();
        line(&mut out, &rule);
        for r in &self.rows {
            line(&mut out, r);
        }
        out
    }
}

/// Generic rendering: scalar fields as key/value rows, arrays of objects as
/// their own tables below.
pub fn value_table(v: &Value) -> String {
    match v {
        Value::Array(items) if items.iter().all(Value::is_object) => {
            let mut keys: Vec<&str> = Vec::new();
            for it in items {
                for k in it.as_object().expect("object").keys() {
                    if !keys.contains(&k.as_str()) {
                        keys.push(k);
                    }
                }
            }
            keys.sort();
            Table::from_objects(&keys, items).render()
        }
        Value::Object(m) => {
            let mut kv = Table::new(&["field", "value"]);
            let mut nested = String::new();
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for k in keys {
                match &m[k] {
                    Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object) => {
                        let _ = write!(nested, "\n{k}\n{}", value_table(&m[k]));
                    }
                    Value::Object(_) => {
                        let _ = write!(nested, "\n{k}\n{}", value_table(&m[k]));
                    }
                    x => kv.rows.push(vec![k.clone(), cell(x)]),
                }
            }
            kv.render() + &nested
        }
        other => format!("{}\n", cell(other)),
    }
}

pub fn emit<T: Serialize>(x: &T, format: Format) -> Result<String> {
    let v = serde_json::to_value(x)?;
    Ok(match format {
        Format::Json => canonical_json(&v),
        Format::Table => value_table(&v),
    })
}
