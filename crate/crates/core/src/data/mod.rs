//! Columnar datasets: ingestion, cleaning, encoding and seeded splitting.
//!
//! A [`Dataset`] is stored column-major as `f64`. Categorical cells hold the
//! index of their category (first-appearance order) until
//! [`encode_categoricals`] expands them into indicator columns.

mod clean;
mod encode;
mod io;
mod profile;
mod split;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use clean::{clean, CleanReport};
pub use encode::{binarize_target, encode_categoricals};
pub use io::{load_csv, load_csv_dir, load_csv_with, read_dataset, sidecar_path, write_dataset, LoadOptions, SchemaSidecar};
pub use io::write_atomic;
pub use profile::{Profile, NSL_KDD_COLUMNS};
pub use split::{stratified_split, stratified_subsample, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    Binary,
    Categorical,
}

/// Per-column schema. `observed_min`/`observed_max` are tracked for numeric
/// and binary columns and are the bounds the data-structure check enforces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
            observed_min: None,
            observed_max: None,
            categories: Vec::new(),
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            kind: ColumnKind::Binary,
            ..Self::numeric(name)
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        Self {
            kind: ColumnKind::Categorical,
            categories,
            ..Self::numeric(name)
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.kind != ColumnKind::Numeric
    }
}

/// Immutable column-major table with a designated target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<ColumnSchema>,
    values: Vec<Vec<f64>>,
    target: usize,
    rows: usize,
    cleaning: CleanReport,
}

impl Dataset {
    /// Build a dataset from column-major values. Bounds of numeric and
    /// binary columns are recomputed from the values.
    pub fn new(columns: Vec<ColumnSchema>, values: Vec<Vec<f64>>, target: usize) -> Result<Self> {
        let mut d = Self::from_parts_unchecked(columns, values, target)?;
        d.refresh_bounds();
        Ok(d)
    }

    /// Like [`Dataset::new`] but keeps the schema bounds as given. Used for
    /// synthetic outputs, which must carry the real schema.
    pub fn with_schema(columns: Vec<ColumnSchema>, values: Vec<Vec<f64>>, target: usize) -> Result<Self> {
        Self::from_parts_unchecked(columns, values, target)
    }

    fn from_parts_unchecked(columns: Vec<ColumnSchema>, values: Vec<Vec<f64>>, target: usize) -> Result<Self> {
        if columns.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} schema entries for {} value columns",
                columns.len(),
                values.len()
            )));
        }
        if target >= columns.len() {
            return Err(Error::Shape(format!(
                "target index {target} out of range for {} columns",
                columns.len()
            )));
        }
        let rows = values[0].len();
        if let Some((i, _)) = values.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(Error::Shape(format!(
                "column {:?} has {} rows, expected {rows}",
                columns[i].name,
                values[i].len()
            )));
        }
        Ok(Self {
            columns,
            values,
            target,
            rows,
            cleaning: CleanReport::default(),
        })
    }

    /// Same schema, new values (e.g. generator output).
    pub fn with_values(&self, values: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_schema(self.columns.clone(), values, self.target)
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &ColumnSchema {
        &self.columns[i]
    }

    pub fn values(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &[f64] {
        &self.values[self.target]
    }

    pub fn cleaning(&self) -> &CleanReport {
        &self.cleaning
    }

    pub(crate) fn set_cleaning(&mut self, report: CleanReport) {
        self.cleaning = report;
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// Indices of every non-target column, in column order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.n_cols()).filter(|&i| i != self.target).collect()
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.values.iter().map(|c| c[r]).collect()
    }

    /// Row-major copy of the non-target columns.
    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        let feats = self.feature_indices();
        (0..self.rows)
            .map(|r| feats.iter().map(|&c| self.values[c][r]).collect())
            .collect()
    }

    /// Target labels as `u8`; anything non-zero counts as attack.
    pub fn labels(&self) -> Vec<u8> {
        self.target().iter().map(|&v| u8::from(v != 0.0)).collect()
    }

    /// `[normal, attack]` row counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &v in self.target() {
            counts[usize::from(v != 0.0)] += 1;
        }
        counts
    }

    /// Row indices grouped by class.
    pub fn class_rows(&self) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for (r, &v) in self.target().iter().enumerate() {
            out[usize::from(v != 0.0)].push(r);
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let values = self
            .values
            .iter()
            .map(|col| rows.iter().map(|&r| col[r]).collect())
            .collect();
        Dataset {
            columns: self.columns.clone(),
            values,
            target: self.target,
            rows: rows.len(),
            cleaning: CleanReport::default(),
        }
    }

    /// Keep the given columns in the given order. The target must be among
    /// them.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Dataset> {
        let target = cols
            .iter()
            .position(|&c| c == self.target)
            .ok_or_else(|| Error::Schema("target column not selected".into()))?;
        let columns = cols.iter().map(|&c| self.columns[c].clone()).collect();
        let values = cols.iter().map(|&c| self.values[c].clone()).collect();
        Ok(Dataset {
            columns,
            values,
            target,
            rows: self.rows,
            cleaning: CleanReport::default(),
        })
    }

    /// Recompute min/max for numeric and binary columns over finite values.
    pub fn refresh_bounds(&mut self) {
        for (schema, col) in self.columns.iter_mut().zip(&self.values) {
            if schema.kind == ColumnKind::Categorical {
                continue;
            }
            let (lo, hi) = finite_range(col);
            schema.observed_min = lo;
            schema.observed_max = hi;
        }
    }

    /// Concatenate rows of datasets sharing the same schema.
    pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
        let first = parts.first().ok_or(Error::Empty("no datasets to concatenate"))?;
        let mut values = first.values.clone();
        for p in &parts[1..] {
            if p.names() != first.names() || p.target != first.target {
                return Err(Error::Schema("concatenated datasets differ in columns".into()));
            }
            for (dst, src) in values.iter_mut().zip(&p.values) {
                dst.extend_from_slice(src);
            }
        }
        Dataset::with_schema(first.columns.clone(), values, first.target)
    }

    /// SHA-256 over schema names and the exact bit patterns of every value.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (schema, col) in self.columns.iter().zip(&self.values) {
            h.update(schema.name.as_bytes());
            h.update([0u8]);
            for v in col {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.update((self.target as u64).to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn finite_range(col: &[f64]) -> (Option<f64>, Option<f64>) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in col.iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= hi {
        (Some(lo), Some(hi))
    } else {
        (None, None)
    }
}
