//! Trace CSVs, run summaries and the optional SVG preview. Every file is
//! written to a temporary sibling first and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use zomirror_core::optimizer::{RunStatus, RunTrace};

pub const CSV_HEADER: &str = "iter,oracle_calls,F,stationarity_sq,eta,wallclock_ms";

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter, r.oracle_calls, r.objective, r.stationarity_sq, r.eta, r.wallclock_ms
        )
        .expect("writing to a String");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub algorithm: String,
    pub seed: u64,
    pub eta: Option<f64>,
    pub nu: f64,
    pub batch: usize,
    pub iterations: usize,
    pub status: String,
    pub returned_index: usize,
    pub returned_objective: Option<f64>,
    pub best_objective: Option<f64>,
    pub final_objective: Option<f64>,
    pub final_stationarity_sq: Option<f64>,
    pub oracle_calls: u64,
    pub csv: String,
}

/// JSON has no NaN; missing or non-finite values become `null`.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn status_text(status: &RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::Diverged { at, reason } => format!("diverged at iteration {at}: {reason}"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub config_hash: String,
    pub runs: &'a [RunSummary],
}

/// Minimal line chart of `F` against the iteration index.
pub fn svg_curve(title: &str, values: &[f64]) -> String {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let finite: Vec<(usize, f64)> = values.iter().copied().enumerate().filter(|(_, v)| v.is_finite()).collect();
    let lo = finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = values.len().max(2) - 1;
    let mut points = String::new();
    for (i, v) in &finite {
        let x = pad + (w - 2.0 * pad) * *i as f64 / n as f64;
        let y = h - pad - (h - 2.0 * pad) * (v - lo) / span;
        write!(points, "{x:.2},{y:.2} ").expect("writing to a String");
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n\
         <text x=\"{pad}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n\
         <text x=\"4\" y=\"{pad}\" font-family=\"sans-serif\" font-size=\"10\">{hi:.4e}</text>\n\
         <text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{lo:.4e}</text>\n\
         <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>\n</svg>\n",
        h - pad,
        points.trim_end()
    )
}

/// Reads the `F` column back from a trace CSV.
pub fn objective_column(csv: &str) -> Result<Vec<f64>, String> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .nth(2)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| format!("row {}: cannot read F", i + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use zomirror_core::optimizer::IterationRecord;
    use zomirror_core::DecisionVector;

    fn trace() -> RunTrace {
        let x = DecisionVector::zeros(2);
        RunTrace {
            records: (1..=3)
                .map(|t| IterationRecord {
                    iter: t,
                    oracle_calls: 8 * t as u64,
                    objective: 1.0 / t as f64,
                    stationarity_sq: f64::NAN,
                    eta: 10.0,
                    wallclock_ms: 0.0,
                })
                .collect(),
            status: RunStatus::Completed,
            returned_index: 2,
            x_returned: x.clone(),
            x_best: x.clone(),
            best_objective: 0.25,
            x_final: x,
            final_objective: 0.25,
            final_stationarity_sq: f64::NAN,
            oracle_calls: 24,
        }
    }

    #[test]
    fn csv_has_header_and_one_row_per_iteration() {
        let csv = trace_csv(&trace());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[2], "2,16,0.5,NaN,10,0");
        assert_eq!(objective_column(&csv).unwrap(), vec![1.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_curve("t", &[3.0, 2.0, f64::NAN, 1.0]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("polyline").count(), 1);
    }
}
