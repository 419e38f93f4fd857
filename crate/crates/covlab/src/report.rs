//! Report assembly: JSON/CSV serialization of certificates and convergence
//! tables, plus the JSON vector encoding.
//!
//! All serialization is byte-deterministic for a fixed (config, seed): maps
//! are ordered, floats are emitted by `serde_json`'s shortest-roundtrip
//! formatter, and row order is fixed.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::basis::{BasisLabel, Scalar, SparseVector};
use crate::certify::Certificate;
use crate::converge::ConvergenceReport;
use crate::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Top-level report wrapper: exact run configuration plus payload.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, serde_json::Value>,
    pub payload: T,
}

pub fn certify_report(
    command: &str,
    config: BTreeMap<String, serde_json::Value>,
    cert: &Certificate,
) -> Report<Certificate> {
    Report { version: VERSION, command: command.into(), config, payload: *cert }
}

pub fn converge_report(
    command: &str,
    config: BTreeMap<String, serde_json::Value>,
    rep: ConvergenceReport,
) -> Report<ConvergenceReport> {
    Report { version: VERSION, command: command.into(), config, payload: rep }
}

pub fn to_json_string<T: Serialize>(r: &Report<T>) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

/// CSV table of a convergence report: `n,probe_id,deviation` rows.
pub fn convergence_csv(rep: &ConvergenceReport) -> String {
    let mut out = String::from("n,probe_id,deviation\n");
    for row in &rep.rows {
        out.push_str(&format!("{},{},{}\n", row.n, csv_escape(&row.probe_id), row.deviation));
    }
    if !rep.cov_track.is_empty() {
        out.push_str("n,cov_lower,cov_upper\n");
        for row in &rep.cov_track {
            out.push_str(&format!("{},{},{}\n", row.n, row.cov.lower, row.cov.upper));
        }
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize, serde::Deserialize)]
struct EntryJson {
    path: Vec<String>,
    index: u128,
    re: f64,
    im: f64,
}

#[derive(Serialize, serde::Deserialize)]
struct VectorJson {
    entries: Vec<EntryJson>,
}

pub fn vector_to_json(v: &SparseVector) -> serde_json::Value {
    let entries: Vec<EntryJson> = v
        .iter()
        .map(|(l, a)| EntryJson { path: l.path.clone(), index: l.index, re: a.re, im: a.im })
        .collect();
    serde_json::to_value(VectorJson { entries }).expect("vector serialization cannot fail")
}

pub fn vector_from_json(v: &serde_json::Value) -> Result<SparseVector, Error> {
    let parsed: VectorJson = serde_json::from_value(v.clone())?;
    Ok(SparseVector::from_entries(parsed.entries.into_iter().map(|e| {
        (BasisLabel::with_path(e.path, e.index), Scalar::new(e.re, e.im))
    })))
}
