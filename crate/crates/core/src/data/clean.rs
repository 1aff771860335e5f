use serde::{Deserialize, Serialize};

use super::Dataset;

/// What a [`clean`] call removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub rows_dropped: usize,
    pub columns_dropped: Vec<String>,
}

/// Drop every row holding a null or non-finite cell, then drop columns that
/// repeat an earlier column's name with identical values.
///
/// Idempotent: cleaning a clean dataset returns it unchanged (with an empty
/// report).
pub fn clean(d: &Dataset) -> Dataset {
    let keep_rows: Vec<usize> = (0..d.row_count())
        .filter(|&r| d.all_values().iter().all(|col| col[r].is_finite()))
        .collect();
    let rows_dropped = d.row_count() - keep_rows.len();
    let filtered = if rows_dropped == 0 {
        d.clone()
    } else {
        d.select_rows(&keep_rows)
    };

    let mut keep_cols = Vec::with_capacity(d.n_cols());
    let mut dropped = Vec::new();
    for c in 0..filtered.n_cols() {
        let name = &filtered.column(c).name;
        let duplicate = c != filtered.target_index()
            && keep_cols.iter().any(|&k: &usize| {
                filtered.column(k).name == *name && filtered.values(k) == filtered.values(c)
            });
        if duplicate {
            dropped.push(name.clone());
        } else {
            keep_cols.push(c);
        }
    }
    let mut out = if dropped.is_empty() {
        filtered
    } else {
        filtered
            .select_columns(&keep_cols)
            .expect("target column is never dropped")
    };
    out.refresh_bounds();
    out.set_cleaning(CleanReport {
        rows_dropped,
        columns_dropped: dropped,
    });
    out
}
