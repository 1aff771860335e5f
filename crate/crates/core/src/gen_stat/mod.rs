//! Statistical generators: resampling balancers and per-class Gaussian
//! mixtures. Each returns a complete class-balanced dataset with the input's
//! schema.

mod gmm;
mod kmeans;
pub mod neighbors;
mod ros;
mod smote;

pub use gmm::{fit_gmm, gmm_fit_sample, select_gmm, EmTrace, GaussianComponent, GmmModel, GmmOptions};
pub use kmeans::{cluster_centroid_balance, kmeans, KMeansOptions, KMeansResult};
pub use ros::ros_balance;
pub use smote::{adasyn_balance, adasyn_quotas, smote_balance};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Desired share of normal rows in a balanced output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceTarget {
    pub normal_share: f64,
}

impl Default for BalanceTarget {
    fn default() -> Self {
        Self { normal_share: 0.5 }
    }
}

/// Majority and minority class labels plus their row indices.
pub(crate) struct ClassSplit {
    pub minority_label: f64,
    pub majority_label: f64,
    pub minority: Vec<usize>,
    pub majority: Vec<usize>,
}

pub(crate) fn split_classes(d: &Dataset) -> Result<ClassSplit> {
    let [normal, attack] = d.class_rows();
    if normal.is_empty() || attack.is_empty() {
        return Err(Error::SingleClass);
    }
    // Ties count normal as the majority.
    Ok(if attack.len() <= normal.len() {
        ClassSplit {
            minority_label: 1.0,
            majority_label: 0.0,
            minority: attack,
            majority: normal,
        }
    } else {
        ClassSplit {
            minority_label: 0.0,
            majority_label: 1.0,
            minority: normal,
            majority: attack,
        }
    })
}

/// Per-feature min-max scaling into [0, 1]; constant columns map to 0.
#[derive(Debug, Clone)]
pub(crate) struct MinMax {
    lo: Vec<f64>,
    range: Vec<f64>,
}

impl MinMax {
    pub fn fit(d: &Dataset, features: &[usize]) -> Self {
        let mut lo = Vec::with_capacity(features.len());
        let mut range = Vec::with_capacity(features.len());
        for &c in features {
            let col = d.values(c);
            let mn = col.iter().copied().fold(f64::INFINITY, f64::min);
            let mx = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lo.push(mn);
            range.push(if mx > mn { mx - mn } else { 1.0 });
        }
        Self { lo, range }
    }

    /// Scaled rows, flattened row-major.
    pub fn transform_rows(&self, d: &Dataset, features: &[usize], rows: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * features.len());
        for &r in rows {
            for (j, &c) in features.iter().enumerate() {
                out.push((d.values(c)[r] - self.lo[j]) / self.range[j]);
            }
        }
        out
    }

    pub fn inverse(&self, j: usize, v: f64) -> f64 {
        v * self.range[j] + self.lo[j]
    }
}

/// Distribute `total` across `weights` proportionally, rounding by largest
/// remainder (ties to the lower index).
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - quotas[a] as f64;
        let rb = exact[b] - quotas[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        quotas[i] += 1;
    }
    quotas
}

/// Append synthetic rows (row-major, full width) to a copy of `d`.
pub(crate) fn append_rows(d: &Dataset, rows: &[Vec<f64>]) -> Result<Dataset> {
    let mut values = d.all_values().to_vec();
    for row in rows {
        for (col, &v) in values.iter_mut().zip(row) {
            col.push(v);
        }
    }
    d.with_values(values)
}
