//! Machine-readable reports.
//!
//! Reports are serialized with `serde_json`, whose float output is the
//! shortest representation that round-trips, and whose maps are key-sorted,
//! so identical runs produce identical bytes. Non-finite floats become `null`.

use std::collections::BTreeMap;

use kframe::{CertReport, FrameBounds, Tol, Vector};
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsOut {
    pub lower: f64,
    pub upper: f64,
    pub lower_optimal: bool,
    pub upper_optimal: bool,
}

impl From<FrameBounds<f64>> for BoundsOut {
    fn from(b: FrameBounds<f64>) -> Self {
        Self {
            lower: b.lower,
            upper: b.upper,
            lower_optimal: b.lower_optimal,
            upper_optimal: b.upper_optimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TolOut {
    pub rel_eps: f64,
    pub rank_eps: f64,
    /// `default`, `env` or `flag`.
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    /// The result the command evaluates.
    pub result: &'static str,
    pub verdict: String,
    pub exit_code: i32,
    pub bounds: Option<BoundsOut>,
    pub margin: Option<f64>,
    pub witness: Option<Vec<[f64; 2]>>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub tolerance: TolOut,
    pub inputs: BTreeMap<String, String>,
    pub details: Value,
}

pub fn witness(v: &Vector<f64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl Report {
    pub fn new(command: &str, result: &'static str, tol: &Tol, tol_source: &'static str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            result,
            verdict: String::new(),
            exit_code: 0,
            bounds: None,
            margin: None,
            witness: None,
            seed,
            trials: None,
            tolerance: TolOut {
                rel_eps: tol.rel_eps,
                rank_eps: tol.rank_eps,
                source: tol_source,
            },
            inputs: BTreeMap::new(),
            details: Value::Object(Default::default()),
        }
    }

    /// Fills verdict, bounds, margin and witness from a certificate.
    pub fn with_cert(mut self, cert: &CertReport<f64>) -> Self {
        self.set_verdict(cert.verdict.as_str(), cert.verdict.is_certified());
        self.bounds = Some(cert.bounds.into());
        self.margin = Some(cert.margin);
        self.witness = Some(witness(&cert.witness));
        self
    }

    pub fn set_verdict(&mut self, verdict: &str, success: bool) {
        self.verdict = verdict.to_string();
        self.exit_code = if success { 0 } else { 1 };
    }

    pub fn render(&self, format: Format) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        match format {
            Format::Json => serde_json::to_string_pretty(&value).expect("report serializes") + "\n",
            Format::Csv => {
                let mut rows = Vec::new();
                flatten("", &value, &mut rows);
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"]).expect("in-memory write");
                for (k, v) in rows {
                    w.write_record([k, v]).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
            }
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
