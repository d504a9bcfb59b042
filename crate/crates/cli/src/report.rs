use std::collections::BTreeMap;
use std::fmt::Write as _;

use asymlab::Params;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA: &str = "asymlab/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperationRecord {
    pub op: String,
    pub parameters: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub versions: BTreeMap<String, String>,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Value>,
    pub operations: Vec<OperationRecord>,
    /// Name of the sidecar file holding wall-clock timings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_file: Option<String>,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        let versions = BTreeMap::from([
            ("asymlab".to_string(), asymlab::VERSION.to_string()),
            ("asymlab-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]);
        Self {
            config: config.clone(),
            versions,
            params: config.params(),
            input: None,
            operations: Vec::new(),
            timing_file: None,
        }
    }

    pub fn record(&mut self, op: &str, parameters: Value) {
        self.operations.push(OperationRecord {
            op: op.to_string(),
            parameters,
        });
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub manifest: RunManifest,
    pub result: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema: String,
    pub command: String,
    pub manifest: RunManifest,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorReport {
    pub fn new(manifest: RunManifest, e: &CliError) -> Self {
        Self {
            schema: SCHEMA.into(),
            command: manifest.config.command.name().into(),
            manifest,
            error: ErrorBody {
                kind: e.kind().into(),
                message: e.to_string(),
                exit_code: e.exit_code(),
            },
        }
    }
}

/// Wall-clock data kept out of the report so reports stay reproducible.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub steps: BTreeMap<String, f64>,
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// One row per matrix entry (column-major) and per numeric leaf, under the
/// header `name,i,j,re,im`.
pub fn to_csv(report: &Report) -> String {
    let mut out = String::from("name,i,j,re,im\n");
    flatten("result", &report.result, &mut out);
    out
}

fn matrix_shape(map: &serde_json::Map<String, Value>) -> Option<(usize, usize)> {
    if !map.contains_key("re") {
        return None;
    }
    let get = |k: &str| map.get(k).and_then(Value::as_u64).map(|v| v as usize);
    match (get("dim"), get("rows"), get("cols")) {
        (Some(d), _, _) => Some((d, d)),
        (None, Some(r), Some(c)) => Some((r, c)),
        _ => None,
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::Bool(b) => Some(f64::from(u8::from(*b))),
        _ => None,
    }
}

fn flatten(name: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            if let Some((rows, cols)) = matrix_shape(map) {
                let re = map["re"].as_array().cloned().unwrap_or_default();
                let im = map.get("im").and_then(Value::as_array).cloned().unwrap_or_default();
                for j in 0..cols {
                    for i in 0..rows {
                        let idx = i * cols + j;
                        let r = re.get(idx).and_then(number).unwrap_or(f64::NAN);
                        let m = im.get(idx).and_then(number).unwrap_or(0.0);
                        let _ = writeln!(out, "{name},{i},{j},{r},{m}");
                    }
                }
                return;
            }
            for (k, child) in map {
                flatten(&format!("{name}.{k}"), child, out);
            }
        }
        Value::Array(items) => {
            if !items.is_empty() && items.iter().all(|x| number(x).is_some()) {
                for (i, x) in items.iter().enumerate() {
                    let _ = writeln!(out, "{name},{i},0,{},0", number(x).unwrap());
                }
            } else {
                for (i, child) in items.iter().enumerate() {
                    flatten(&format!("{name}[{i}]"), child, out);
                }
            }
        }
        other => {
            if let Some(x) = number(other) {
                let _ = writeln!(out, "{name},0,0,{x},0");
            }
        }
    }
}
