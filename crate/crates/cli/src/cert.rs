//! Certificates: versioned JSON records with sorted keys, holding the
//! parameters needed to regenerate a result alongside the result itself.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::commands::{compute, Context, Params};
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative tolerance for real numbers during re-verification.
pub const REAL_RTOL: f64 = 1e-8;
/// Absolute floor so values that should be zero (σ_min of a singular
/// matrix) compare sensibly.
pub const REAL_ATOL: f64 = 1e-14;

pub fn kind_of(params: &Params) -> &'static str {
    match params {
        Params::Classify(_) | Params::CrossCheck(_) => "classification",
        Params::Construct(_) | Params::Corollary(_) | Params::LemmaSearch(_) => "construction",
        Params::Conjecture1(_) | Params::Conjecture2(_) | Params::Hierarchy(_) => "conjecture_scan",
        Params::TriClassify(_) => "tri_interval",
        Params::SamplingDemo(_) => "sampling_report",
        Params::Reproduce(_) => "fixture",
    }
}

pub fn build(params: &Params, results: Value, wall_time: f64, threads: Option<usize>) -> Result<Value, CliError> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind_of(params),
        "parameters": serde_json::to_value(params)?,
        "results": results,
        "provenance": {
            "tool_version": TOOL_VERSION,
            "timestamp": timestamp,
            "wall_time": wall_time,
            "threads": threads,
        },
    }))
}

/// Pretty JSON; `serde_json` maps keep keys sorted.
pub fn render(cert: &Value) -> String {
    let mut s = serde_json::to_string_pretty(cert).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Copy without the fields allowed to differ between identical runs.
pub fn strip_volatile(cert: &Value) -> Value {
    let mut c = cert.clone();
    if let Some(p) = c.get_mut("provenance").and_then(Value::as_object_mut) {
        p.remove("timestamp");
        p.remove("wall_time");
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= (REAL_RTOL * a.abs().max(b.abs())).max(REAL_ATOL)
}

/// Records every path where `actual` differs from `expected`.
pub fn compare(path: &str, expected: &Value, actual: &Value, out: &mut Vec<String>) {
    match (expected, actual) {
        (Value::Number(e), Value::Number(a)) => {
            let exact = match (e.as_i64(), a.as_i64(), e.as_u64(), a.as_u64()) {
                (Some(x), Some(y), _, _) => Some(x == y),
                (_, _, Some(x), Some(y)) => Some(x == y),
                _ => None,
            };
            let same = match exact {
                Some(same) if e.is_f64() == a.is_f64() => same,
                _ => close(e.as_f64().unwrap_or(f64::NAN), a.as_f64().unwrap_or(f64::NAN)),
            };
            if !same {
                out.push(format!("{path}: recomputed {e}, certificate has {a}"));
            }
        }
        (Value::Object(e), Value::Object(a)) => {
            for (k, v) in e {
                match a.get(k) {
                    Some(w) => compare(&format!("{path}.{k}"), v, w, out),
                    None => out.push(format!("{path}.{k}: missing from certificate")),
                }
            }
            for k in a.keys().filter(|k| !e.contains_key(*k)) {
                out.push(format!("{path}.{k}: not produced on recomputation"));
            }
        }
        (Value::Array(e), Value::Array(a)) => {
            if e.len() != a.len() {
                out.push(format!("{path}: recomputed {} entries, certificate has {}", e.len(), a.len()));
                return;
            }
            for (i, (v, w)) in e.iter().zip(a).enumerate() {
                compare(&format!("{path}[{i}]"), v, w, out);
            }
        }
        (e, a) if e == a => {}
        (e, a) => out.push(format!("{path}: recomputed {e}, certificate has {a}")),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, CliError> {
    obj.get(key)
        .ok_or_else(|| CliError::Verification(format!("certificate lacks {key:?}")))
}

/// Regenerates the results from the certificate's parameters and compares.
pub fn verify_value(cert: &Value, ctx: &Context) -> Result<VerifyReport, CliError> {
    let obj = cert
        .as_object()
        .ok_or_else(|| CliError::Verification("certificate is not a JSON object".into()))?;
    let version = field(obj, "schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(CliError::Verification(format!("unsupported schema_version {version}")));
    }
    let params: Params = serde_json::from_value(field(obj, "parameters")?.clone())
        .map_err(|e| CliError::Verification(format!("parameters: {e}")))?;
    let claimed = field(obj, "results")?;
    let mut mismatches = Vec::new();
    if field(obj, "kind")? != kind_of(&params) {
        mismatches.push(format!("kind: expected {:?}", kind_of(&params)));
    }
    let outcome = compute(&params, ctx)?;
    compare("results", &outcome.results, claimed, &mut mismatches);
    mismatches.extend(crate::commands::check_claims(&params, claimed, ctx)?);
    Ok(VerifyReport { mismatches })
}

pub fn verify_file(path: &Path, ctx: &Context) -> Result<VerifyReport, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Verification(format!("{}: {e}", path.display())))?;
    let cert: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Verification(format!("{}: {e}", path.display())))?;
    verify_value(&cert, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diff(e: Value, a: Value) -> Vec<String> {
        let mut out = Vec::new();
        compare("r", &e, &a, &mut out);
        out
    }

    #[test]
    fn numbers_compare_with_tolerance() {
        assert!(diff(json!(1.0), json!(1.0 + 1e-12)).is_empty());
        assert_eq!(diff(json!(1.0), json!(1.1)).len(), 1);
        assert!(diff(json!(1e-17), json!(0.0)).is_empty());
        assert_eq!(diff(json!(3), json!(4)).len(), 1);
        assert!(diff(json!(3), json!(3)).is_empty());
    }

    #[test]
    fn structure_differences_are_reported() {
        assert_eq!(diff(json!({"a": 1}), json!({"a": 1, "b": 2})), vec!["r.b: not produced on recomputation"]);
        assert_eq!(diff(json!({"a": 1}), json!({})), vec!["r.a: missing from certificate"]);
        assert_eq!(diff(json!([1, 2]), json!([1])).len(), 1);
        assert_eq!(diff(json!("x"), json!(true)).len(), 1);
        assert_eq!(diff(json!(null), json!(0.5)).len(), 1);
    }

    #[test]
    fn volatile_fields_are_stripped() {
        let c = json!({"provenance": {"timestamp": 1, "wall_time": 0.5, "threads": 2}});
        assert_eq!(strip_volatile(&c), json!({"provenance": {"threads": 2}}));
    }
}
