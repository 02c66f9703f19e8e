use std::fmt::Write as _;

use anyhow::{Context, Result};
use maxplus_core::io::to_stable_json;
use maxplus_core::{ResidualReport, StateSpace};
use serde_json::{json, Map, Value};

use crate::{Format, RunConfig};

pub fn emit(report: &Value, cfg: &RunConfig) -> Result<()> {
    let mut text = match cfg.format {
        Format::Json => to_stable_json(report)?,
        Format::Table => table(&serde_json::from_str(&to_stable_json(report)?)?),
    };
    text.push('\n');
    match &cfg.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One `path  value` row per leaf; scalar arrays on one row.
pub fn table(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:width$}  {v}");
    }
    out.pop();
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(&key(k), x, rows);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, rows);
            }
        }
        Value::Array(a) => rows.push((prefix.to_string(), a.iter().map(scalar).collect::<Vec<_>>().join(", "))),
        other => rows.push((prefix.to_string(), scalar(other))),
    }
}

/// Residual table keyed by state label.
pub fn residuals(states: &StateSpace, r: &ResidualReport) -> Value {
    let label = |k: usize| states.label(r.states[k]).to_string();
    let table: Map<String, Value> = (0..r.residuals.len()).map(|k| (label(k), json!(r.residuals[k]))).collect();
    let excluded: Vec<String> = (0..r.residuals.len()).filter(|&k| r.excluded[k]).map(label).collect();
    json!({
        "kind": r.kind,
        "holds": r.holds(),
        "worst": r.worst(),
        "tol": r.tol,
        "violations": r.violations().into_iter().map(label).collect::<Vec<_>>(),
        "excluded": excluded,
        "residuals": table,
    })
}
