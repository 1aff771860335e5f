//! Fidelity and balance scoring. Everything here is deterministic.

mod kde;
mod ks;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use kde::{kde_estimate, kde_on_grid, kde_pair, linspace, silverman_bandwidth, trapezoid, KdeCurve, GRID_POINTS};
pub use ks::ks_statistic;

use crate::data::{ColumnKind, ColumnSchema, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "Yes",
            Verdict::No => "No",
        })
    }
}

/// Map each name of `names` to its column in `d`.
fn align(names: &[&str], d: &Dataset) -> Result<Vec<usize>> {
    if d.n_cols() != names.len() {
        return Err(Error::Schema(format!(
            "{} columns vs {} in the reference",
            d.n_cols(),
            names.len()
        )));
    }
    names
        .iter()
        .map(|n| d.index_of(n).ok_or_else(|| Error::MissingColumn(n.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsFinding {
    pub column: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsReport {
    pub verdict: Verdict,
    pub violations: Vec<DsFinding>,
}

/// Binary columns must hold only 0/1 and numeric columns must stay inside
/// the real observed range.
pub fn data_structure_check(real_schema: &[ColumnSchema], synth: &Dataset) -> Result<DsReport> {
    let names: Vec<&str> = real_schema.iter().map(|c| c.name.as_str()).collect();
    let idx = align(&names, synth)?;
    let mut violations = Vec::new();
    for (schema, &c) in real_schema.iter().zip(&idx) {
        let x = synth.values(c);
        match schema.kind {
            ColumnKind::Binary => {
                if let Some(v) = x.iter().find(|&&v| v != 0.0 && v != 1.0) {
                    violations.push(DsFinding {
                        column: schema.name.clone(),
                        reason: format!("non-binary value {v}"),
                    });
                }
            }
            ColumnKind::Numeric => {
                let (lo, hi) = (
                    schema.observed_min.unwrap_or(f64::NEG_INFINITY),
                    schema.observed_max.unwrap_or(f64::INFINITY),
                );
                if let Some(v) = x.iter().find(|&&v| !(v >= lo && v <= hi)) {
                    violations.push(DsFinding {
                        column: schema.name.clone(),
                        reason: format!("value {v} outside [{lo}, {hi}]"),
                    });
                }
            }
            ColumnKind::Categorical => {
                let k = schema.categories.len() as f64;
                if let Some(v) = x.iter().find(|&&v| v.fract() != 0.0 || v < 0.0 || v >= k) {
                    violations.push(DsFinding {
                        column: schema.name.clone(),
                        reason: format!("invalid category index {v}"),
                    });
                }
            }
        }
    }
    Ok(DsReport {
        verdict: Verdict::from_bool(violations.is_empty()),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrThresholds {
    pub mean_tol: f64,
    pub max_tol: f64,
}

impl Default for CorrThresholds {
    fn default() -> Self {
        Self {
            mean_tol: 0.05,
            max_tol: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub verdict: Verdict,
    pub names: Vec<String>,
    pub real_abs: Vec<Vec<f64>>,
    pub synth_abs: Vec<Vec<f64>>,
    pub abs_diff: Vec<Vec<f64>>,
    pub mean_diff: f64,
    pub max_diff: f64,
}

/// Absolute Pearson correlation matrix; constant columns correlate as 0.
pub fn abs_correlation_matrix(cols: &[&[f64]]) -> Vec<Vec<f64>> {
    let p = cols.len();
    let centered: Vec<Option<Vec<f64>>> = cols
        .iter()
        .map(|x| {
            let n = x.len() as f64;
            let m = x.iter().sum::<f64>() / n;
            let c: Vec<f64> = x.iter().map(|v| v - m).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm > 0.0).then(|| c.iter().map(|v| v / norm).collect())
        })
        .collect();
    let mut out = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            let v = match (&centered[i], &centered[j]) {
                (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs().min(1.0),
                _ => 0.0,
            };
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

pub fn correlation_report(real: &Dataset, synth: &Dataset, t: &CorrThresholds) -> Result<CorrelationReport> {
    let names = real.names();
    let idx = align(&names, synth)?;
    for (c, col) in real.columns().iter().enumerate() {
        let x = real.values(c);
        if x.iter().all(|&v| v == x[0]) {
            log::warn!("column {} is constant in the real data; correlated as 0", col.name);
        }
    }
    let real_cols: Vec<&[f64]> = (0..real.n_cols()).map(|c| real.values(c)).collect();
    let synth_cols: Vec<&[f64]> = idx.iter().map(|&c| synth.values(c)).collect();
    let real_abs = abs_correlation_matrix(&real_cols);
    let synth_abs = abs_correlation_matrix(&synth_cols);
    let p = names.len();
    let mut abs_diff = vec![vec![0.0; p]; p];
    let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0usize);
    for i in 0..p {
        for j in 0..p {
            let d = (real_abs[i][j] - synth_abs[i][j]).abs();
            abs_diff[i][j] = d;
            if i != j {
                sum += d;
                max = max.max(d);
                count += 1;
            }
        }
    }
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    Ok(CorrelationReport {
        verdict: Verdict::from_bool(mean <= t.mean_tol && max <= t.max_tol),
        names: names.iter().map(|s| s.to_string()).collect(),
        real_abs,
        synth_abs,
        abs_diff,
        mean_diff: mean,
        max_diff: max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdThresholds {
    pub ks_threshold: f64,
    /// Per-side row cap for the KS test; larger inputs are subsampled.
    pub max_rows: usize,
}

impl Default for PdThresholds {
    fn default() -> Self {
        Self {
            ks_threshold: 0.10,
            max_rows: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableVerdict {
    pub name: String,
    pub ks: f64,
    pub differs: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdReport {
    pub pd_percent: f64,
    pub variables: Vec<VariableVerdict>,
    /// `(variable, real curve, synthetic curve)`.
    pub kde: Vec<(String, KdeCurve, KdeCurve)>,
}

/// Share of differing variables, in percent.
pub fn pd_percent_from_counts(differing: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * differing as f64 / total as f64
    }
}

/// Deterministic class-stratified thinning to at most `cap` rows: evenly
/// spaced rows within each class, proportional quotas.
pub fn thin_rows(d: &Dataset, cap: usize) -> Vec<usize> {
    let n = d.row_count();
    if n <= cap {
        return (0..n).collect();
    }
    let classes = d.class_rows();
    let quotas = crate::gen_stat::largest_remainder(&[classes[0].len() as f64, classes[1].len() as f64], cap);
    let mut rows: Vec<usize> = classes
        .iter()
        .zip(quotas)
        .flat_map(|(rows, q)| (0..q).map(move |i| rows[i * rows.len() / q]))
        .collect();
    rows.sort_unstable();
    rows
}

pub fn pd_percent(real: &Dataset, synth: &Dataset, t: &PdThresholds) -> Result<PdReport> {
    let names = real.names();
    let idx = align(&names, synth)?;
    let real_rows = thin_rows(real, t.max_rows);
    let synth_rows = thin_rows(synth, t.max_rows);
    let mut variables = Vec::with_capacity(names.len());
    let mut kde = Vec::with_capacity(names.len());
    for (c, &sc) in idx.iter().enumerate() {
        let a: Vec<f64> = real_rows.iter().map(|&r| real.values(c)[r]).collect();
        let b: Vec<f64> = synth_rows.iter().map(|&r| synth.values(sc)[r]).collect();
        let ks = ks_statistic(&a, &b);
        variables.push(VariableVerdict {
            name: names[c].to_string(),
            ks,
            differs: ks > t.ks_threshold,
        });
        let (kr, ksy) = kde_pair(&a, &b);
        kde.push((names[c].to_string(), kr, ksy));
    }
    let differing = variables.iter().filter(|v| v.differs).count();
    Ok(PdReport {
        pd_percent: pd_percent_from_counts(differing, variables.len()),
        variables,
        kde,
    })
}

/// `|P(normal) - P(attack)| * 100`.
pub fn class_balance_diff(synth: &Dataset) -> Result<f64> {
    let n = synth.row_count();
    if n == 0 {
        return Err(Error::Empty("synthetic data"));
    }
    let [normal, attack] = synth.class_counts();
    Ok((normal as f64 - attack as f64).abs() / n as f64 * 100.0)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub ds_verdict: Verdict,
    pub corr_verdict: Verdict,
    pub pd_percent: f64,
    pub cb_percent: f64,
    pub trtr_accuracy: f64,
    pub tstr_accuracy: f64,
    /// Wall-clock time; kept out of serialized reports so they stay
    /// reproducible byte for byte.
    #[serde(skip)]
    pub runtime_seconds: f64,
}
