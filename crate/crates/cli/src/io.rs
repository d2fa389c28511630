use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use cyclotile::{Error, RawSet, ZmSet};
use serde_json::Value;

/// Reads a set file in JSON or two-line text form. Duplicates are dropped
/// with a warning; `modulus`, when given, must match the file header.
pub fn load_set(path: &Path, modulus: Option<u64>) -> Result<ZmSet> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let raw = RawSet::parse(&text).with_context(|| format!("{}", path.display()))?;
    if let Some(expected) = modulus {
        if raw.modulus != expected {
            return Err(Error::ModulusMismatch {
                expected,
                found: raw.modulus,
            })
            .with_context(|| format!("{}", path.display()));
        }
    }
    let dups = raw.duplicate_count();
    if dups > 0 {
        eprintln!("warning: {}: dropped {dups} duplicate element(s)", path.display());
    }
    raw.into_set().with_context(|| format!("{}", path.display()))
}

pub fn save_set(path: &Path, set: &ZmSet) -> Result<()> {
    fs::write(path, set.to_json() + "\n")
        .with_context(|| format!("cannot write {}", path.display()))
}

/// `key: value` lines, with nested keys joined by dots and scalar arrays on
/// one line.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    flatten("", value, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    let line = |out: &mut String, body: &str| {
        if prefix.is_empty() {
            out.push_str(body);
        } else {
            out.push_str(&format!("{prefix}: {body}"));
        }
        out.push('\n');
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            if let Some(parts) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                line(out, &parts.join(" "));
            } else {
                for (i, v) in items.iter().enumerate() {
                    flatten(&format!("{prefix}[{i}]"), v, out);
                }
            }
        }
        v => line(out, &scalar(v).unwrap_or_default()),
    }
}
