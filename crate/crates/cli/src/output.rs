//! Report serialization: CSV tables, JSON, atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use cvieval::evaluate::{EvaluationReport, Protocol, ProtocolDetail};

use crate::CliError;

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes `bytes` to `dir/name` through a temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// One row per partition: k, algorithm, each index value, ARI.
pub fn partitions_csv(report: &EvaluationReport) -> Result<Vec<u8>, CliError> {
    let mut header = vec!["k".to_string(), "algorithm".to_string()];
    header.extend(report.cvis.iter().map(|c| c.name().to_string()));
    header.push("ari".to_string());
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.k.to_string(), r.algorithm.clone()];
            row.extend(r.values.iter().map(|c| opt(c.value)));
            row.push(opt(r.ari));
            row
        })
        .collect();
    csv_bytes(&header, &rows)
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "cvi",
    "direction",
    "best_value",
    "best_k",
    "ari_at_best",
    "milligan_cooper",
    "k_delta",
    "gurrutxaga",
    "vendramin",
    "new_goodness",
];

/// One row per index, in the column order of the usual comparison table.
pub fn summary_csv(report: &EvaluationReport) -> Result<Vec<u8>, CliError> {
    let header: Vec<String> = SUMMARY_HEADER.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = report
        .summaries
        .iter()
        .map(|s| {
            let score = |p: Protocol| opt(s.score(p).map(|x| x.value));
            let k_delta = s
                .score(Protocol::MilliganCooper)
                .and_then(|x| match x.detail {
                    ProtocolDetail::MilliganCooper { k_delta, .. } => Some(k_delta.to_string()),
                    _ => None,
                })
                .unwrap_or_default();
            vec![
                s.cvi.name().to_string(),
                match s.direction {
                    cvieval::Direction::Maximize => "max".to_string(),
                    cvieval::Direction::Minimize => "min".to_string(),
                },
                opt(s.best.as_ref().map(|b| b.value)),
                s.best.as_ref().map(|b| b.k.to_string()).unwrap_or_default(),
                opt(s.best.as_ref().and_then(|b| b.ari)),
                score(Protocol::MilliganCooper),
                k_delta,
                score(Protocol::Gurrutxaga),
                score(Protocol::Vendramin),
                score(Protocol::NewGoodness),
            ]
        })
        .collect();
    csv_bytes(&header, &rows)
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}
