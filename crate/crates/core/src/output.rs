//! File formats: CSV tables and line-delimited JSON, UTF-8 with LF endings.
//! Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::drift::DriftReport;
use crate::error::{Error, Result};
use crate::resource::ResourcePoint;

pub const RESOURCE_CSV_HEADER: &str =
    "n,mu_opt,p_error,ti_quantum,ti_classical_best,ti_classical_lb,metric,protocol,post_selected";
pub const DRIFT_CSV_HEADER: &str = "block,true_phase,estimate,residual,visibility";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn resource_csv(points: &[ResourcePoint]) -> String {
    let mut s = String::from(RESOURCE_CSV_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            p.n,
            opt(p.mu_opt),
            opt(p.p_error_achieved),
            opt(p.ti_quantum),
            p.ti_classical_best,
            p.ti_classical_lb,
            p.metric,
            p.protocol,
            p.post_selected
        );
    }
    s
}

pub fn drift_csv(report: &DriftReport) -> String {
    let mut s = String::from(DRIFT_CSV_HEADER);
    s.push('\n');
    for b in &report.blocks {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            b.block, b.true_phase, b.estimate, b.residual, b.visibility
        );
    }
    s
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_resource_csv(path: &Path, points: &[ResourcePoint]) -> Result<()> {
    write_text(path, &resource_csv(points))
}

pub fn write_drift_csv(path: &Path, report: &DriftReport) -> Result<()> {
    write_text(path, &drift_csv(report))
}

/// One JSON object per line.
pub fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a line-JSON file; blank lines are skipped.
pub fn read_json_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
