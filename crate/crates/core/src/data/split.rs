use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 42,
            stratified: true,
        }
    }
}

fn shuffled(mut idx: Vec<usize>, seed: u64) -> Vec<usize> {
    idx.shuffle(&mut rng::seeded(seed));
    idx
}

/// Seeded train/test split. Stratified splits take `round(f * n_c)` rows of
/// each class (at least one per side); rows keep their original order
/// within each partition.
pub fn stratified_split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    if spec.stratified {
        for (class, rows) in d.class_rows().into_iter().enumerate() {
            if rows.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class: class as u8,
                    count: rows.len(),
                    needed: 2,
                });
            }
            let n = rows.len();
            let k = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
            let rows = shuffled(rows, rng::derive(spec.seed, class as u64));
            train.extend_from_slice(&rows[..k]);
            test.extend_from_slice(&rows[k..]);
        }
    } else {
        let n = d.row_count();
        if n < 2 {
            return Err(Error::Empty("need at least two rows to split"));
        }
        let k = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        let rows = shuffled((0..n).collect(), spec.seed);
        train.extend_from_slice(&rows[..k]);
        test.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

/// Split `n` into per-class quotas proportional to `counts` by largest
/// remainder, keeping every present class represented when `n` allows.
pub(crate) fn proportional_quotas(counts: [usize; 2], n: usize) -> [usize; 2] {
    let total = counts[0] + counts[1];
    if total == 0 {
        return [0, 0];
    }
    let exact = [n as f64 * counts[0] as f64 / total as f64, n as f64 * counts[1] as f64 / total as f64];
    let mut q = [exact[0].floor() as usize, exact[1].floor() as usize];
    let mut rest = n - q[0] - q[1];
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (exact[b] - q[b] as f64).total_cmp(&(exact[a] - q[a] as f64)).then(a.cmp(&b)));
    for &c in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        if q[c] < counts[c] {
            q[c] += 1;
            rest -= 1;
        }
    }
    if n >= 2 {
        for c in 0..2 {
            let o = 1 - c;
            if q[c] == 0 && counts[c] > 0 && q[o] > 1 {
                q[c] += 1;
                q[o] -= 1;
            }
        }
    }
    q
}

/// Seeded class-stratified subsample of exactly `n` rows.
pub fn stratified_subsample(d: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n > d.row_count() {
        return Err(Error::InvalidArgument(format!(
            "subsample of {n} rows requested from {} rows",
            d.row_count()
        )));
    }
    let quotas = proportional_quotas(d.class_counts(), n);
    let mut keep = Vec::with_capacity(n);
    for (class, rows) in d.class_rows().into_iter().enumerate() {
        let rows = shuffled(rows, rng::derive(seed, class as u64));
        keep.extend_from_slice(&rows[..quotas[class]]);
    }
    keep.sort_unstable();
    Ok(d.select_rows(&keep))
}
