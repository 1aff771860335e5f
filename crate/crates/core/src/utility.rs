//! Machine-learning utility: a bagged CART ensemble and the TRTR / TSTR
//! protocol.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{stratified_split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    /// Histogram bins per feature for split search.
    pub bins: usize,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 16,
            bins: 64,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(u8),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(c) => return c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Per-feature bin codes; `thresholds[j][k]` separates bin `k` from `k + 1`.
struct Binned {
    codes: Vec<Vec<u16>>,
    thresholds: Vec<Vec<f64>>,
}

fn bin_features(cols: &[&[f64]], bins: usize) -> Binned {
    let mut codes = Vec::with_capacity(cols.len());
    let mut thresholds = Vec::with_capacity(cols.len());
    for x in cols {
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        let t: Vec<f64> = if distinct.len() <= bins {
            distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
        } else {
            let n = sorted.len();
            let mut t: Vec<f64> = (1..bins).map(|k| sorted[k * n / bins]).collect();
            t.dedup();
            if t.last() == sorted.last() {
                t.pop();
            }
            t
        };
        codes.push(x.iter().map(|v| t.partition_point(|e| e < v) as u16).collect());
        thresholds.push(t);
    }
    Binned { codes, thresholds }
}

fn gini(n0: f64, n1: f64) -> f64 {
    let n = n0 + n1;
    if n == 0.0 {
        0.0
    } else {
        1.0 - (n0 / n).powi(2) - (n1 / n).powi(2)
    }
}

fn majority(n0: usize, n1: usize) -> u8 {
    u8::from(n1 > n0)
}

fn grow_tree(binned: &Binned, y: &[u8], rows: Vec<u32>, params: &ForestParams, rng: &mut rng::Rng) -> Tree {
    let p = binned.codes.len();
    let mtry = ((p as f64).sqrt().round() as usize).clamp(1, p);
    let mut nodes = Vec::new();
    // (node slot, rows, depth)
    let mut stack = vec![(0usize, rows, 0usize)];
    nodes.push(Node::Leaf(0));
    let mut features: Vec<usize> = (0..p).collect();
    let mut hist: Vec<[u32; 2]> = Vec::new();
    while let Some((slot, rows, depth)) = stack.pop() {
        let n1 = rows.iter().filter(|&&r| y[r as usize] == 1).count();
        let n0 = rows.len() - n1;
        nodes[slot] = Node::Leaf(majority(n0, n1));
        if n0 == 0 || n1 == 0 || depth >= params.max_depth || rows.len() < params.min_samples_split {
            continue;
        }
        let parent = gini(n0 as f64, n1 as f64) * rows.len() as f64;
        let mut best: Option<(f64, usize, usize)> = None;
        features.shuffle(rng);
        let mut tried = 0;
        for &f in &features {
            if tried >= mtry && best.is_some() {
                break;
            }
            let nb = binned.thresholds[f].len() + 1;
            if nb < 2 {
                continue;
            }
            hist.clear();
            hist.resize(nb, [0, 0]);
            for &r in &rows {
                hist[binned.codes[f][r as usize] as usize][y[r as usize] as usize] += 1;
            }
            let occupied = hist.iter().filter(|h| h[0] + h[1] > 0).count();
            if occupied < 2 {
                continue;
            }
            tried += 1;
            let (mut l0, mut l1) = (0.0, 0.0);
            for (k, h) in hist.iter().enumerate().take(nb - 1) {
                l0 += f64::from(h[0]);
                l1 += f64::from(h[1]);
                let (r0, r1) = (n0 as f64 - l0, n1 as f64 - l1);
                if l0 + l1 == 0.0 || r0 + r1 == 0.0 {
                    continue;
                }
                let impurity = gini(l0, l1) * (l0 + l1) + gini(r0, r1) * (r0 + r1);
                let gain = parent - impurity;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, k));
                }
            }
        }
        let Some((_, f, k)) = best else { continue };
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
            rows.iter().partition(|&&r| binned.codes[f][r as usize] as usize <= k);
        let left = nodes.len();
        nodes.push(Node::Leaf(0));
        let right = nodes.len();
        nodes.push(Node::Leaf(0));
        nodes[slot] = Node::Split {
            feature: f,
            threshold: binned.thresholds[f][k],
            left,
            right,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, left_rows, depth + 1));
    }
    Tree { nodes }
}

/// Bagged CART ensemble with majority vote.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pub features: Vec<String>,
    pub params: ForestParams,
    trees: Vec<Tree>,
}

pub fn train_tree_ensemble(train: &Dataset, params: &ForestParams, seed: u64) -> Result<ClassifierModel> {
    if params.trees == 0 || params.bins < 2 || params.bins > usize::from(u16::MAX) {
        return Err(Error::InvalidArgument("forest needs >= 1 tree and 2..=65535 bins".into()));
    }
    let [n0, n1] = train.class_counts();
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let features = train.feature_indices();
    let cols: Vec<&[f64]> = features.iter().map(|&c| train.values(c)).collect();
    let binned = bin_features(&cols, params.bins);
    let y = train.labels();
    let n = train.row_count();
    let trees = (0..params.trees)
        .map(|t| {
            let mut rng = rng::seeded(rng::derive(seed, t as u64));
            let mut rows: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();
            rows.sort_unstable();
            grow_tree(&binned, &y, rows, params, &mut rng)
        })
        .collect();
    Ok(ClassifierModel {
        features: features.iter().map(|&c| train.column(c).name.clone()).collect(),
        params: *params,
        trees,
    })
}

impl ClassifierModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Majority vote; ties go to the normal class.
    pub fn predict(&self, d: &Dataset) -> Result<Vec<u8>> {
        let idx: Vec<usize> = self
            .features
            .iter()
            .map(|n| d.index_of(n).ok_or_else(|| Error::MissingColumn(n.clone())))
            .collect::<Result<_>>()?;
        if idx.len() + 1 != d.n_cols() {
            return Err(Error::Schema(format!(
                "model has {} features, data has {}",
                idx.len(),
                d.n_cols() - 1
            )));
        }
        let mut x = vec![0.0; idx.len()];
        Ok((0..d.row_count())
            .map(|r| {
                for (slot, &c) in x.iter_mut().zip(&idx) {
                    *slot = d.values(c)[r];
                }
                let votes: usize = self.trees.iter().map(|t| usize::from(t.predict(&x))).sum();
                u8::from(2 * votes > self.trees.len())
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(truth: &[u8], pred: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(pred) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, 0) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        c
    }
}

/// Binary scores with attack (1) as the positive class. Undefined ratios
/// are reported as 0 and named in `zero_division`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub confusion: Confusion,
    pub zero_division: Vec<String>,
}

impl Scores {
    pub fn from_confusion(c: Confusion) -> Self {
        let mut zero_division = Vec::new();
        let mut ratio = |num: usize, den: usize, name: &str| {
            if den == 0 {
                zero_division.push(name.to_string());
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let total = c.tp + c.fp + c.fn_ + c.tn;
        let accuracy = ratio(c.tp + c.tn, total, "accuracy");
        let precision = ratio(c.tp, c.tp + c.fp, "precision");
        let recall = ratio(c.tp, c.tp + c.fn_, "recall");
        let f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_, "f1");
        Self {
            accuracy,
            f1,
            precision,
            recall,
            confusion: c,
            zero_division,
        }
    }
}

pub fn evaluate(model: &ClassifierModel, test: &Dataset) -> Result<Scores> {
    let pred = model.predict(test)?;
    Ok(Scores::from_confusion(Confusion::from_labels(&test.labels(), &pred)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityResult {
    pub trtr: Scores,
    pub tstr: Scores,
    pub classifier_config: ForestParams,
    pub seed: u64,
    /// SHA-256 of the real test partition both arms were scored on.
    pub test_fingerprint: String,
    pub train_rows: usize,
    pub synth_rows: usize,
}

/// Score a classifier trained on real-train and one trained on `synth`
/// against the same real test partition.
pub fn trtr_tstr_split(train: &Dataset, test: &Dataset, synth: &Dataset, params: &ForestParams, seed: u64) -> Result<UtilityResult> {
    if synth.names() != train.names() {
        return Err(Error::Schema("synthetic columns differ from the real columns".into()));
    }
    let fingerprint = test.fingerprint();
    let arm = |name: &str, d: &Dataset| -> Result<Scores> {
        let model = train_tree_ensemble(d, params, seed).map_err(|e| Error::InvalidArgument(format!("{name}: {e}")))?;
        evaluate(&model, test).map_err(|e| Error::InvalidArgument(format!("{name}: {e}")))
    };
    let trtr = arm("TRTR", train)?;
    let tstr = arm("TSTR", synth)?;
    assert_eq!(fingerprint, test.fingerprint(), "test partition changed between arms");
    Ok(UtilityResult {
        trtr,
        tstr,
        classifier_config: *params,
        seed,
        test_fingerprint: fingerprint,
        train_rows: train.row_count(),
        synth_rows: synth.row_count(),
    })
}

/// Split `real` once, then run both arms.
pub fn trtr_tstr(real: &Dataset, synth: &Dataset, split: &SplitSpec, params: &ForestParams, seed: u64) -> Result<UtilityResult> {
    let (train, test) = stratified_split(real, split)?;
    trtr_tstr_split(&train, &test, synth, params, seed)
}
