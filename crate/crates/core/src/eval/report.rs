//! JSON and CSV report emitters.
//!
//! Every report carries the SHA-256 of the canonical JSON of its config, the
//! seeds used and the library version.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub version: String,
}

impl ReportMeta {
    pub fn new<C: Serialize>(config: &C, seeds: Vec<u64>) -> Self {
        ReportMeta {
            config_hash: config_hash(config),
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn config_hash<C: Serialize>(value: &C) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<T> {
    pub meta: ReportMeta,
    pub suite: String,
    pub rows: Vec<T>,
}

pub fn to_json<T: Serialize>(report: &Report<T>) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

fn csv_field(v: &serde_json::Value) -> String {
    let raw = match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

/// CSV with one line per row; rows must serialize to flat objects. Metadata
/// goes in leading `#` comment lines.
pub fn to_csv<T: Serialize>(report: &Report<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# suite: {}", report.suite);
    let _ = writeln!(out, "# config_hash: {}", report.meta.config_hash);
    let seeds: Vec<String> = report.meta.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(out, "# seeds: {}", seeds.join(" "));
    let _ = writeln!(out, "# version: {}", report.meta.version);
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = report
        .rows
        .iter()
        .map(|r| match serde_json::to_value(r).expect("row serializes") {
            serde_json::Value::Object(m) => m,
            other => {
                let mut m = serde_json::Map::new();
                m.insert("value".into(), other);
                m
            }
        })
        .collect();
    let Some(first) = rows.first() else {
        return out;
    };
    let header: Vec<&String> = first.keys().collect();
    let _ = writeln!(out, "{}", header.iter().map(|h| h.as_str()).collect::<Vec<_>>().join(","));
    for r in &rows {
        let line: Vec<String> = header
            .iter()
            .map(|h| r.get(*h).map(csv_field).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}
