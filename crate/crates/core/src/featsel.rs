//! Dependence measures and mutual-information feature selection.
//!
//! Entropies are plug-in (maximum-likelihood) estimates in nats. Columns with
//! few distinct values are treated exactly; others are cut into
//! equal-frequency bins. Joint entropies use the product of the two marginal
//! binnings, which makes `MI(X, X) = H(X)` hold exactly.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default bin count for a column of `n` values: `min(64, ceil(sqrt(n)))`.
pub fn default_bins(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, 64)
}

/// Discretized column: a code in `0..levels` per value.
#[derive(Debug, Clone, PartialEq)]
pub struct Codes {
    pub codes: Vec<u32>,
    pub levels: usize,
}

/// Exact-value codes when the column has at most `max(bins, 2)` distinct
/// values, otherwise equal-frequency bins with duplicate edges collapsed.
pub fn discretize(x: &[f64], bins: usize) -> Codes {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= bins.max(2) {
        let codes = x
            .iter()
            .map(|v| distinct.partition_point(|d| d.total_cmp(v).is_lt()) as u32)
            .collect();
        return Codes {
            codes,
            levels: distinct.len(),
        };
    }
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..bins).map(|i| sorted[i * n / bins]).collect();
    edges.dedup();
    // A value v lands in bin #{edges <= v}; drop an edge at the minimum so
    // bin 0 is never empty.
    if edges.first() == Some(&sorted[0]) {
        edges.remove(0);
    }
    let codes = x.iter().map(|&v| edges.partition_point(|&e| e <= v) as u32).collect();
    Codes {
        codes,
        levels: edges.len() + 1,
    }
}

fn entropy_of_counts(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
    let n = n as f64;
    let mut h = 0.0;
    for c in counts.filter(|&c| c > 0) {
        let p = c as f64 / n;
        h -= p * p.ln();
    }
    h.max(0.0)
}

fn marginal_entropy(c: &Codes) -> f64 {
    let mut counts = vec![0usize; c.levels];
    for &k in &c.codes {
        counts[k as usize] += 1;
    }
    entropy_of_counts(counts.into_iter(), c.codes.len())
}

fn joint_entropy(a: &Codes, b: &Codes) -> f64 {
    let n = a.codes.len();
    let cells = a.levels.saturating_mul(b.levels);
    if cells <= 1 << 20 {
        let mut counts = vec![0usize; cells];
        for (&x, &y) in a.codes.iter().zip(&b.codes) {
            counts[x as usize * b.levels + y as usize] += 1;
        }
        entropy_of_counts(counts.into_iter(), n)
    } else {
        let mut pairs: Vec<u64> = a
            .codes
            .iter()
            .zip(&b.codes)
            .map(|(&x, &y)| (u64::from(x) << 32) | u64::from(y))
            .collect();
        pairs.sort_unstable();
        let runs = pairs.chunk_by(|p, q| p == q).map(<[u64]>::len);
        entropy_of_counts(runs, n)
    }
}

/// Plug-in Shannon entropy (nats).
pub fn entropy(x: &[f64], bins: usize) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty("entropy of an empty vector"));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    Ok(marginal_entropy(&discretize(x, bins)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMethod {
    BinnedPlugin,
}

/// Entropy terms behind one mutual-information estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceEstimate {
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    /// `h_x + h_y - h_xy`, clamped at zero.
    pub mi: f64,
    pub method: EstimatorMethod,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Empty("mutual information of empty vectors"));
    }
    Ok(())
}

fn estimate_codes(a: &Codes, b: &Codes) -> DependenceEstimate {
    let h_x = marginal_entropy(a);
    let h_y = marginal_entropy(b);
    let h_xy = joint_entropy(a, b);
    DependenceEstimate {
        h_x,
        h_y,
        h_xy,
        mi: (h_x + h_y - h_xy).max(0.0),
        method: EstimatorMethod::BinnedPlugin,
    }
}

pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> Result<DependenceEstimate> {
    check_pair(x, y)?;
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    Ok(estimate_codes(&discretize(x, bins), &discretize(y, bins)))
}

/// Mutual information between two already-discretized columns.
pub fn mutual_information_codes(a: &Codes, b: &Codes) -> DependenceEstimate {
    estimate_codes(a, b)
}

/// `H(Y) - H(Y | X)` with `H(Y | X) = H(X, Y) - H(X)`.
pub fn information_gain(y: &[f64], x: &[f64], bins: usize) -> Result<f64> {
    check_pair(x, y)?;
    let cx = discretize(x, bins);
    let cy = discretize(y, bins);
    let h_y = marginal_entropy(&cy);
    let h_y_given_x = joint_entropy(&cx, &cy) - marginal_entropy(&cx);
    Ok((h_y - h_y_given_x).max(0.0))
}

/// Pearson product-moment correlation.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Features ranked by mutual information with the target, highest first.
/// Ties are broken by ascending feature name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiRanking {
    pub entries: Vec<(String, f64)>,
}

impl MiRanking {
    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,score\n");
        for (name, score) in &self.entries {
            out.push_str(&csv_field(name));
            out.push_str(&format!(",{score:.6}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Score every non-target column against the target.
pub fn rank_features(d: &Dataset, bins: Option<usize>) -> MiRanking {
    let bins = bins.unwrap_or_else(|| default_bins(d.row_count()));
    let target = discretize(d.target(), 2);
    let mut entries: Vec<(String, f64)> = d
        .feature_indices()
        .into_iter()
        .map(|c| {
            let codes = discretize(d.values(c), bins);
            (d.column(c).name.clone(), estimate_codes(&codes, &target).mi)
        })
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    MiRanking { entries }
}

/// How many top-ranked features to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "count")]
pub enum SelectionRule {
    /// `ceil(0.25 * feature_count)`.
    Quartile,
    Fixed(usize),
}

impl SelectionRule {
    pub fn keep_count(self, features: usize) -> usize {
        match self {
            SelectionRule::Quartile => features.div_ceil(4),
            SelectionRule::Fixed(k) => k.min(features),
        }
    }
}

/// Keep the top quartile of features by MI; see [`select_features`].
pub fn select_top_quartile(d: &Dataset) -> Result<(Dataset, MiRanking)> {
    select_features(d, SelectionRule::Quartile)
}

/// Rank all features and keep the top ones (in rank order) plus the target,
/// which goes last.
pub fn select_features(d: &Dataset, rule: SelectionRule) -> Result<(Dataset, MiRanking)> {
    let features = d.n_cols() - 1;
    if features < 4 {
        return Err(Error::InvalidArgument(format!(
            "feature selection needs at least 4 features, found {features}"
        )));
    }
    let ranking = rank_features(d, None);
    let keep = rule.keep_count(features);
    let mut cols: Vec<usize> = ranking.entries[..keep]
        .iter()
        .map(|(name, _)| d.index_of(name).expect("ranked names come from the dataset"))
        .collect();
    cols.push(d.target_index());
    Ok((d.select_columns(&cols)?, ranking))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::test_support::table;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_has_zero_entropy() {
        assert_eq!(entropy(&[3.0; 17], 4).unwrap(), 0.0);
    }

    #[test]
    fn fair_coin_entropy_is_ln2() {
        let x: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        assert_eq!(entropy(&x, 8).unwrap(), std::f64::consts::LN_2);
    }

    #[test]
    fn exact_value_entropy() {
        // p = (1/2, 1/4, 1/4)
        let expected = -(0.5f64 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
        let h = entropy(&[1.0, 1.0, 2.0, 3.0], 4).unwrap();
        assert!((h - expected).abs() < 1e-15);
        assert!((h - 1.0397).abs() < 1e-4);
    }

    #[test]
    fn empty_and_mismatch_errors() {
        assert!(matches!(entropy(&[], 4), Err(Error::Empty(_))));
        assert!(matches!(
            mutual_information(&[1.0], &[1.0, 2.0], 4),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(information_gain(&[1.0], &[1.0, 2.0], 4).is_err());
    }

    #[test]
    fn equal_frequency_bins() {
        let x: Vec<f64> = (0..100).map(f64::from).collect();
        let c = discretize(&x, 4);
        assert_eq!(c.levels, 4);
        for k in 0..4 {
            assert_eq!(c.codes.iter().filter(|&&v| v == k).count(), 25);
        }
        // heavy point mass at zero collapses duplicate edges
        let mut z = vec![0.0; 90];
        z.extend((1..=10).map(f64::from));
        let c = discretize(&z, 4);
        assert!(c.levels < 4 || c.codes.iter().filter(|&&v| v == 0).count() == 90);
    }

    #[test]
    fn mi_of_identical_binary_is_entropy() {
        let x: Vec<f64> = (0..50).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let e = mutual_information(&x, &x, 8).unwrap();
        assert_eq!(e.mi, e.h_x);
    }

    #[test]
    fn independent_coins_have_near_zero_mi() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let x: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
        let e = mutual_information(&x, &y, 2).unwrap();
        assert!(e.mi < 0.002, "mi = {}", e.mi);
    }

    #[test]
    fn information_gain_edges() {
        let y = vec![1.0; 20];
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(information_gain(&y, &x, 4).unwrap(), 0.0);
        let b: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        assert!((information_gain(&b, &b, 4).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn pearson_hand_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        // cov: dx = (-1.5,-.5,.5,1.5), dy = (-.5,-1.5,1.5,.5) -> sum 0.75+0.75+0.75+0.75 = 3; sxx = syy = 5
        assert!((pearson_correlation(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &y).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson_correlation(&x, &[1.0; 4]), Err(Error::ZeroVariance)));
    }

    fn toy_selection_table() -> crate::data::Dataset {
        let n = 64;
        let target: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i % 4 == 1 || i % 5 == 0))).collect();
        let mut feats: Vec<(String, Vec<f64>)> = (0..7)
            .map(|k| (format!("noise{k}"), (0..n).map(|i| ((i * (k + 3) * 7919) % 13) as f64).collect()))
            .collect();
        feats.insert(3, ("copy".into(), target.clone()));
        let refs: Vec<(&str, Vec<f64>)> = feats.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
        table(&refs, target)
    }

    #[test]
    fn feature_equal_to_target_ranks_first() {
        let d = toy_selection_table();
        let (sel, ranking) = select_top_quartile(&d).unwrap();
        assert_eq!(ranking.entries.len(), 8);
        assert_eq!(ranking.entries[0].0, "copy");
        assert_eq!(sel.n_cols(), 3);
        assert_eq!(sel.column(0).name, "copy");
        assert_eq!(sel.column(2).name, "target");
    }

    #[test]
    fn ranking_ignores_column_order() {
        let d = toy_selection_table();
        let mut order: Vec<usize> = (0..d.n_cols()).rev().collect();
        order.rotate_left(3);
        let shuffled = d.select_columns(&order).unwrap();
        assert_eq!(rank_features(&d, None), rank_features(&shuffled, None));
    }

    #[test]
    fn too_few_features() {
        let d = table(&[("a", vec![1.0, 2.0]), ("b", vec![0.0, 1.0])], vec![0.0, 1.0]);
        assert!(select_top_quartile(&d).is_err());
    }

    #[test]
    fn keep_counts() {
        assert_eq!(SelectionRule::Quartile.keep_count(77), 20);
        assert_eq!(SelectionRule::Quartile.keep_count(100), 25);
        assert_eq!(SelectionRule::Quartile.keep_count(8), 2);
        assert_eq!(SelectionRule::Fixed(25).keep_count(123), 25);
    }

    proptest! {
        #[test]
        fn mi_is_symmetric(xs in prop::collection::vec(-50i32..50, 2..200), seed in 0u64..1000) {
            let x: Vec<f64> = xs.iter().map(|&v| f64::from(v)).collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = x.iter().map(|v| v * 0.5 + f64::from(rng.random_range(-20i32..20))).collect();
            let a = mutual_information(&x, &y, 8).unwrap();
            let b = mutual_information(&y, &x, 8).unwrap();
            prop_assert!((a.mi - b.mi).abs() <= 1e-12);
            prop_assert!((a.mi - (a.h_x + a.h_y - a.h_xy)).abs() <= 1e-12 || a.h_x + a.h_y - a.h_xy < 0.0);
            let ig = information_gain(&y, &x, 8).unwrap();
            prop_assert!((ig - a.mi).abs() <= 1e-9);
        }

        #[test]
        fn mi_self_equals_entropy(xs in prop::collection::vec(-1000.0f64..1000.0, 1..300), bins in 1usize..40) {
            let e = mutual_information(&xs, &xs, bins).unwrap();
            prop_assert_eq!(e.mi, e.h_x);
            prop_assert_eq!(e.h_x, entropy(&xs, bins).unwrap());
        }

        #[test]
        fn pearson_affine_invariant(
            xs in prop::collection::vec(-100.0f64..100.0, 3..60),
            a in 0.1f64..10.0, b in -50.0f64..50.0, c in 0.1f64..10.0, d in -50.0f64..50.0,
        ) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, v)| v.sin() * 3.0 + i as f64).collect();
            if let Ok(r) = pearson_correlation(&xs, &ys) {
                let x2: Vec<f64> = xs.iter().map(|v| a * v + b).collect();
                let y2: Vec<f64> = ys.iter().map(|v| c * v + d).collect();
                let r2 = pearson_correlation(&x2, &y2).unwrap();
                prop_assert!((r - r2).abs() <= 1e-12, "{} vs {}", r, r2);
            }
        }
    }
}
