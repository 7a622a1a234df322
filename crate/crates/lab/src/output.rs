use std::path::{Path, PathBuf};

use crate::error::LabError;
use crate::experiments::ExperimentResult;

pub const CSV_HEADER: [&str; 6] = ["t", "computed", "reference", "ratio", "error_bound", "method"];

/// CSV table, one row per result row. Floats use the shortest
/// round-tripping representation, so reruns are byte-identical.
pub fn to_csv(result: &ExperimentResult) -> Result<String, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| LabError::Encode(e.to_string());
    w.write_record(CSV_HEADER).map_err(enc)?;
    for r in &result.rows {
        w.write_record([
            num(r.t),
            num(r.computed),
            num(r.reference),
            r.ratio.map(num).unwrap_or_default(),
            num(r.error_bound),
            r.method.clone(),
        ])
        .map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LabError::Encode(e.to_string()))
}

/// Shortest round-tripping decimal; exponent form outside `[1e-4, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn to_json(result: &ExperimentResult) -> Result<String, LabError> {
    serde_json::to_string_pretty(result).map_err(|e| LabError::Encode(e.to_string()))
}

/// Write `<stem>.csv` and `<stem>.json` into `dir`, creating it if needed.
pub fn write_outputs(result: &ExperimentResult, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), LabError> {
    let csv = to_csv(result)?;
    let json = to_json(result)?;
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&csv_path, csv)?;
    std::fs::write(&json_path, json)?;
    Ok((csv_path, json_path))
}
