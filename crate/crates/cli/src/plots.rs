//! Figure data: KDE pairs per variable and correlation heatmap matrices,
//! optionally rendered as static SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use netsynth_core::metrics::{CorrelationReport, KdeCurve};
use netsynth_core::Method;

use crate::artifact::{self, Stamp};
use crate::pipeline::{method_dir, RunIndex};

#[derive(Deserialize)]
struct KdeEntry {
    variable: String,
    real: KdeCurve,
    synthetic: KdeCurve,
}

/// File-name-safe form of a column name.
pub fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

/// Write plot inputs for every completed method of a run. Returns the
/// number of files written.
pub fn emit_plot_data(run_dir: &Path, svg: bool) -> Result<usize> {
    let index_path = run_dir.join("run.json");
    if !index_path.exists() {
        bail!("{} is not a run directory (run.json missing)", run_dir.display());
    }
    let raw = artifact::read_json(&index_path)?;
    let stamp = Stamp::from_json(&raw).context("run.json lacks seed/config_hash")?;
    let index: RunIndex = serde_json::from_value(raw)?;
    let mut written = 0;
    for &m in &index.methods {
        let mdir = method_dir(run_dir, m);
        if !mdir.join("eval.json").exists() {
            continue;
        }
        written += emit_method(&stamp, run_dir, m, &mdir, svg)?;
    }
    Ok(written)
}

fn emit_method(stamp: &Stamp, run_dir: &Path, m: Method, mdir: &Path, svg: bool) -> Result<usize> {
    let kde_json = artifact::read_json(&mdir.join("kde.json")).with_context(|| format!("{m}: KDE artifact"))?;
    let corr_json = artifact::read_json(&mdir.join("corr.json")).with_context(|| format!("{m}: correlation artifact"))?;
    let entries: Vec<KdeEntry> = serde_json::from_value(kde_json["variables"].clone())?;
    let corr: CorrelationReport = serde_json::from_value(corr_json["correlation"].clone())?;

    let out = run_dir.join("plots").join(m.key());
    if out.exists() {
        fs::remove_dir_all(&out)?;
    }
    let mut written = 0;
    for (i, e) in entries.iter().enumerate() {
        let stem = format!("{i:02}_{}", sanitize(&e.variable));
        let mut body = String::from("grid,real_density,synth_density\n");
        for ((x, r), s) in e.real.grid.iter().zip(&e.real.density).zip(&e.synthetic.density) {
            let _ = writeln!(body, "{x},{r},{s}");
        }
        stamp.write_csv(&out.join("kde").join(format!("{stem}.csv")), &body)?;
        written += 1;
        if svg {
            let title = format!("{} - {}", m.display_name(), e.variable);
            artifact::write(&out.join("kde").join(format!("{stem}.svg")), kde_svg(stamp, &title, e).as_bytes())?;
            written += 1;
        }
    }
    for (name, matrix) in [
        ("corr_real_abs", &corr.real_abs),
        ("corr_synth_abs", &corr.synth_abs),
        ("corr_abs_diff", &corr.abs_diff),
    ] {
        stamp.write_csv(&out.join(format!("{name}.csv")), &matrix_csv(&corr.names, matrix)?)?;
        written += 1;
        if svg {
            let title = format!("{} - {name}", m.display_name());
            artifact::write(
                &out.join(format!("{name}.svg")),
                heatmap_svg(stamp, &title, &corr.names, matrix).as_bytes(),
            )?;
            written += 1;
        }
    }
    Ok(written)
}

fn matrix_csv(names: &[String], m: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("variable").chain(names.iter().map(String::as_str)))?;
    for (name, row) in names.iter().zip(m) {
        let cells: Vec<String> = std::iter::once(name.clone()).chain(row.iter().map(|v| v.to_string())).collect();
        w.write_record(&cells)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(stamp: &Stamp, w: u32, h: u32, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <!-- seed={} config_hash={} -->\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        stamp.seed,
        stamp.config_hash,
        w / 2,
        escape(title)
    )
}

fn kde_svg(stamp: &Stamp, title: &str, e: &KdeEntry) -> String {
    let (w, h, pad) = (480.0, 300.0, 40.0);
    let grid = &e.real.grid;
    let (x0, x1) = (grid[0], grid[grid.len() - 1]);
    let ymax = e
        .real
        .density
        .iter()
        .chain(&e.synthetic.density)
        .fold(0.0f64, |a, &b| a.max(b))
        .max(1e-300);
    let span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let path = |d: &[f64]| {
        let mut s = String::new();
        for (x, y) in grid.iter().zip(d) {
            let px = pad + (x - x0) / span * (w - 2.0 * pad);
            let py = h - pad - y / ymax * (h - 2.0 * pad);
            let _ = write!(s, "{px:.2},{py:.2} ");
        }
        s.trim_end().to_string()
    };
    let mut out = svg_open(stamp, w as u32, h as u32, title);
    let _ = writeln!(
        out,
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        h - pad,
        w - pad
    );
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>",
        path(&e.real.density)
    );
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"4 2\" points=\"{}\"/>",
        path(&e.synthetic.density)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{x0:.3}</text>",
        pad,
        h - pad + 15.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{x1:.3}</text>",
        w - pad,
        h - pad + 15.0
    );
    out.push_str("<text x=\"330\" y=\"45\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#1f77b4\">real</text>\n");
    out.push_str("<text x=\"380\" y=\"45\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">synthetic</text>\n");
    out.push_str("</svg>\n");
    out
}

/// White (0) to dark red (1).
fn heat(v: f64) -> String {
    let t = v.clamp(0.0, 1.0);
    let g = (255.0 * (1.0 - t)).round() as u8;
    let r = (255.0 - 100.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}{g:02x}")
}

fn heatmap_svg(stamp: &Stamp, title: &str, names: &[String], m: &[Vec<f64>]) -> String {
    let n = names.len().max(1) as u32;
    let cell = 16u32;
    let label = 160u32;
    let size = label + n * cell + 20;
    let mut out = svg_open(stamp, size, size + 20, title);
    for (i, name) in names.iter().enumerate() {
        let y = 40 + label + i as u32 * cell + cell - 4;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>",
            label - 4,
            escape(name)
        );
        let x = label + i as u32 * cell + cell - 4;
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" transform=\"rotate(-90 {x} {})\">{}</text>",
            40 + label - 4,
            40 + label - 4,
            escape(name)
        );
    }
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\"><title>{v:.4}</title></rect>",
                label + j as u32 * cell,
                40 + label + i as u32 * cell,
                heat(v)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
