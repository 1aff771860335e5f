use rand::Rng;

use super::neighbors::KdTree;
use super::{append_rows, largest_remainder, split_classes, ClassSplit, MinMax};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Effective neighbour count for a minority class of `n` rows.
fn effective_k(k: usize, n: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::ClassTooSmall {
            class: 0,
            count: n,
            needed: 2,
        });
    }
    if n < k + 1 {
        log::warn!("minority class has {n} rows; reducing k from {k} to {}", n - 1);
        return Ok(n - 1);
    }
    Ok(k)
}

/// Minority rows in scaled space plus the scaler used.
struct MinorityIndex {
    scaler: MinMax,
    features: Vec<usize>,
    scaled: Vec<f64>,
}

impl MinorityIndex {
    fn new(d: &Dataset, split: &ClassSplit) -> Self {
        let features = d.feature_indices();
        let scaler = MinMax::fit(d, &features);
        let scaled = scaler.transform_rows(d, &features, &split.minority);
        Self {
            scaler,
            features,
            scaled,
        }
    }

    fn dim(&self) -> usize {
        self.features.len()
    }
}

/// `x + u * (nn - x)` per feature in original units; target set to `label`.
fn interpolate(d: &Dataset, features: &[usize], base: usize, nn: usize, u: f64, label: f64) -> Vec<f64> {
    let mut row = vec![0.0; d.n_cols()];
    for &c in features {
        let col = d.values(c);
        row[c] = col[base] + u * (col[nn] - col[base]);
    }
    row[d.target_index()] = label;
    row
}

/// SMOTE: interpolate between a random minority row and one of its `k`
/// nearest minority neighbours (Euclidean on min-max scaled features) until
/// the classes are equal.
pub fn smote_balance(d: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    let split = split_classes(d)?;
    let need = split.majority.len() - split.minority.len();
    if need == 0 {
        return Ok(d.clone());
    }
    let k = effective_k(k, split.minority.len())?;
    let index = MinorityIndex::new(d, &split);
    let tree = KdTree::new(&index.scaled, index.dim().max(1));
    let mut cache: Vec<Option<Vec<usize>>> = vec![None; split.minority.len()];
    let mut rng = rng::seeded(seed);
    let mut rows = Vec::with_capacity(need);
    for _ in 0..need {
        let i = rng.random_range(0..split.minority.len());
        let nbrs = cache[i].get_or_insert_with(|| {
            tree.nearest(tree.point(i), k, Some(i))
                .into_iter()
                .map(|(j, _)| j)
                .collect()
        });
        let j = nbrs[rng.random_range(0..nbrs.len())];
        let u: f64 = rng.random();
        rows.push(interpolate(
            d,
            &index.features,
            split.minority[i],
            split.minority[j],
            u,
            split.minority_label,
        ));
    }
    append_rows(d, &rows)
}

/// Per-minority-row generation quotas from majority-neighbour ratios.
/// Falls back to uniform quotas when every ratio is zero.
pub fn adasyn_quotas(ratios: &[f64], total: usize) -> Vec<usize> {
    if ratios.iter().all(|&r| r <= 0.0) {
        log::warn!("no minority row has majority neighbours; using uniform ADASYN quotas");
        return largest_remainder(&vec![1.0; ratios.len()], total);
    }
    largest_remainder(ratios, total)
}

/// ADASYN: like SMOTE, but each minority row's share of the synthetic rows
/// is proportional to the fraction of majority rows among its `k` nearest
/// neighbours in the full dataset.
pub fn adasyn_balance(d: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    let split = split_classes(d)?;
    let need = split.majority.len() - split.minority.len();
    if need == 0 {
        return Ok(d.clone());
    }
    let k = effective_k(k, split.minority.len())?;
    let index = MinorityIndex::new(d, &split);
    let dim = index.dim().max(1);

    let all_rows: Vec<usize> = (0..d.row_count()).collect();
    let all_scaled = index.scaler.transform_rows(d, &index.features, &all_rows);
    let all_tree = KdTree::new(&all_scaled, dim);
    let labels = d.target();
    let k_all = k.min(d.row_count() - 1);
    let ratios: Vec<f64> = split
        .minority
        .iter()
        .map(|&r| {
            let nbrs = all_tree.nearest(&all_scaled[r * dim..(r + 1) * dim], k_all, Some(r));
            let majority = nbrs.iter().filter(|(j, _)| labels[*j] == split.majority_label).count();
            majority as f64 / k_all as f64
        })
        .collect();
    let quotas = adasyn_quotas(&ratios, need);

    let tree = KdTree::new(&index.scaled, dim);
    let mut rng = rng::seeded(seed);
    let mut rows = Vec::with_capacity(need);
    for (i, &q) in quotas.iter().enumerate() {
        if q == 0 {
            continue;
        }
        let nbrs: Vec<usize> = tree.nearest(tree.point(i), k, Some(i)).into_iter().map(|(j, _)| j).collect();
        for _ in 0..q {
            let j = nbrs[rng.random_range(0..nbrs.len())];
            let u: f64 = rng.random();
            rows.push(interpolate(
                d,
                &index.features,
                split.minority[i],
                split.minority[j],
                u,
                split.minority_label,
            ));
        }
    }
    append_rows(d, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::test_support::table;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn two_point_minority_stays_on_segment() {
        let mut x = vec![0.0, 1.0];
        x.extend((0..20).map(|i| 2.0 + f64::from(i)));
        let mut t = vec![1.0, 1.0];
        t.extend(vec![0.0; 20]);
        let d = table(&[("x", x)], t);
        let out = smote_balance(&d, 1, 4).unwrap();
        assert_eq!(out.class_counts(), [20, 20]);
        for r in d.row_count()..out.row_count() {
            let v = out.values(0)[r];
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(out.target()[r], 1.0);
        }
    }

    #[test]
    fn smote_leaves_binary_domain() {
        // interpolated indicators leave {0, 1}
        let flag: Vec<f64> = (0..40).map(|i| f64::from(u8::from(i % 2 == 0))).collect();
        let x: Vec<f64> = (0..40).map(f64::from).collect();
        let t: Vec<f64> = (0..40).map(|i| f64::from(u8::from(i < 10))).collect();
        let d = table(&[("x", x), ("flag", flag)], t);
        let out = smote_balance(&d, 5, 9).unwrap();
        assert!(out.values(1).iter().any(|&v| v != 0.0 && v != 1.0));
    }

    #[test]
    fn k_reduced_for_tiny_minority() {
        let d = table(
            &[("x", vec![0.0, 1.0, 5.0, 6.0, 7.0, 8.0, 9.0])],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        let out = smote_balance(&d, 5, 1).unwrap();
        assert_eq!(out.class_counts(), [5, 5]);
    }

    #[test]
    fn adasyn_hand_quotas() {
        assert_eq!(adasyn_quotas(&[0.2, 0.6, 0.2], 10), vec![2, 6, 2]);
        assert_eq!(adasyn_quotas(&[0.0, 0.0, 0.0], 10), vec![4, 3, 3]);
    }

    #[test]
    fn adasyn_focuses_on_border_rows() {
        // minority at 0..5 (deep) and one minority row inside the majority
        let mut x: Vec<f64> = (0..5).map(f64::from).collect();
        x.push(50.5);
        x.extend((0..30).map(|i| 40.0 + f64::from(i)));
        let mut t = vec![1.0; 6];
        t.extend(vec![0.0; 30]);
        let d = table(&[("x", x)], t);
        let out = adasyn_balance(&d, 3, 2).unwrap();
        assert_eq!(out.class_counts(), [30, 30]);
    }

    #[test]
    fn adasyn_uniform_fallback() {
        let mut x: Vec<f64> = (0..6).map(f64::from).collect();
        x.extend((0..12).map(|i| 1000.0 + f64::from(i)));
        let mut t = vec![1.0; 6];
        t.extend(vec![0.0; 12]);
        let d = table(&[("x", x)], t);
        let out = adasyn_balance(&d, 2, 2).unwrap();
        assert_eq!(out.class_counts(), [12, 12]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn synthetic_rows_within_parent_hull(seed in 0u64..500, n_min in 3usize..12) {
            let n = 40;
            let mut rng = rng::seeded(seed);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
            let t: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i < n_min))).collect();
            let d = table(&[("a", a), ("b", b)], t);
            for out in [smote_balance(&d, 3, seed).unwrap(), adasyn_balance(&d, 3, seed).unwrap()] {
                prop_assert_eq!(out.class_counts(), [n - n_min, n - n_min]);
                for c in 0..2 {
                    let lo = d.values(c)[..n_min].iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = d.values(c)[..n_min].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    for &v in &out.values(c)[n..] {
                        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
                    }
                }
                let again = smote_balance(&d, 3, seed).unwrap();
                prop_assert_eq!(again.fingerprint(), smote_balance(&d, 3, seed).unwrap().fingerprint());
            }
        }
    }
}
