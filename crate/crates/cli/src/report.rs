//! Comparison table in the layout of the published result tables.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use netsynth_core::metrics::Verdict;
use netsynth_core::{Category, Method};

use crate::artifact::{self, Stamp};
use crate::pipeline::{method_dir, read_eval, RunIndex};

/// Placeholder for cells of a method that produced no result.
pub const FAILED_CELL: &str = "--";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub category: Category,
    pub method: Method,
    pub ds: Option<Verdict>,
    pub corr: Option<Verdict>,
    pub pd_percent: Option<f64>,
    pub cb_percent: Option<f64>,
    pub tstr_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRow {
    pub fn failed(&self) -> bool {
        self.tstr_accuracy.is_none()
    }

    fn cells(&self) -> [String; 7] {
        let opt = |v: Option<String>| v.unwrap_or_else(|| FAILED_CELL.to_string());
        [
            self.category.label().to_string(),
            self.method.display_name().to_string(),
            opt(self.ds.map(|v| v.to_string())),
            opt(self.corr.map(|v| v.to_string())),
            opt(self.pd_percent.map(|v| format!("{v:.2}"))),
            opt(self.cb_percent.map(|v| format!("{v:.2}"))),
            opt(self.tstr_accuracy.map(|v| format!("{v:.4}"))),
        ]
    }
}

const HEADER: [&str; 7] = ["category", "method", "ds", "corr", "pd_percent", "cb_percent", "tstr_accuracy"];

fn failure_text(run_dir: &Path, m: Method) -> String {
    artifact::read_json(&method_dir(run_dir, m).join("failure.json"))
        .ok()
        .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_string))
        .unwrap_or_else(|| "no result recorded".to_string())
}

/// Build `report.csv`, `report.json` and `summary.txt` from a run
/// directory. Nothing is written unless every input could be read.
pub fn emit_report(run_dir: &Path) -> Result<Vec<ReportRow>> {
    let index_path = run_dir.join("run.json");
    if !index_path.exists() {
        bail!("{} is not a run directory (run.json missing)", run_dir.display());
    }
    let raw = artifact::read_json(&index_path)?;
    let stamp = Stamp::from_json(&raw).context("run.json lacks seed/config_hash")?;
    let index: RunIndex = serde_json::from_value(raw).context("parsing run.json")?;

    let mut methods = index.methods.clone();
    methods.sort_by_key(|m| (m.category(), *m));
    let mut rows = Vec::with_capacity(methods.len());
    for m in methods {
        let row = match read_eval(run_dir, m)? {
            Some(e) => ReportRow {
                category: m.category(),
                method: m,
                ds: Some(e.ds_verdict),
                corr: Some(e.corr_verdict),
                pd_percent: Some(e.pd_percent),
                cb_percent: Some(e.cb_percent),
                tstr_accuracy: Some(e.tstr_accuracy),
                error: None,
            },
            None => ReportRow {
                category: m.category(),
                method: m,
                ds: None,
                corr: None,
                pd_percent: None,
                cb_percent: None,
                tstr_accuracy: None,
                error: Some(failure_text(run_dir, m)),
            },
        };
        rows.push(row);
    }

    let csv = render_csv(&index, &rows)?;
    let json = stamp.json(&serde_json::json!({
        "profile": index.profile,
        "rows": index.rows,
        "columns": index.columns.len(),
        "trtr_accuracy": index.trtr.accuracy,
        "methods": rows,
    }))?;
    let summary = render_summary(&stamp, &index, &rows);
    stamp.write_csv(&run_dir.join("report.csv"), &csv)?;
    artifact::write(&run_dir.join("report.json"), &json)?;
    artifact::write(&run_dir.join("summary.txt"), summary.as_bytes())?;
    Ok(rows)
}

fn render_csv(index: &RunIndex, rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!("# trtr_accuracy={:.4}\n{body}", index.trtr.accuracy))
}

fn render_summary(stamp: &Stamp, index: &RunIndex, rows: &[ReportRow]) -> String {
    let mut out = stamp.csv_header();
    let _ = writeln!(
        out,
        "Comparison of synthetic data on {} ({} rows, {} columns)",
        index.profile,
        index.rows,
        index.columns.len()
    );
    let _ = writeln!(out, "TRTR accuracy: {:.4}\n", index.trtr.accuracy);
    let titles = ["Category", "Method", "DS", "Corr", "PD (%)", "CB (%)", "Accuracy (TSTR)"];
    let cells: Vec<[String; 7]> = rows.iter().map(ReportRow::cells).collect();
    let widths: Vec<usize> = (0..7)
        .map(|i| cells.iter().map(|c| c[i].len()).chain([titles[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |c: &[&str]| {
        let mut s = String::new();
        for (i, cell) in c.iter().enumerate() {
            if i < 2 {
                let _ = write!(s, "{cell:<w$}  ", w = widths[i]);
            } else {
                let _ = write!(s, "{cell:>w$}  ", w = widths[i]);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    out.push_str(&line(&titles));
    for c in &cells {
        out.push_str(&line(&c.iter().map(String::as_str).collect::<Vec<_>>()));
    }
    let failed: Vec<&ReportRow> = rows.iter().filter(|r| r.failed()).collect();
    if !failed.is_empty() {
        out.push_str("\nFailed methods:\n");
        for r in failed {
            let _ = writeln!(out, "  {}: {}", r.method.display_name(), r.error.as_deref().unwrap_or(""));
        }
    }
    out
}
