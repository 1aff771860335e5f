use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::featsel::{discretize, mutual_information_codes, Codes};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BnParams {
    /// Quantile bins for numeric columns.
    pub bins: usize,
    /// Laplace smoothing pseudo-count.
    pub alpha: f64,
}

impl Default for BnParams {
    fn default() -> Self {
        Self { bins: 8, alpha: 1.0 }
    }
}

/// How one column's codes map back to values.
#[derive(Debug, Clone)]
enum Levels {
    /// Exact values, one per code.
    Exact(Vec<f64>),
    /// Observed `[min, max]` per bin.
    Ranges(Vec<(f64, f64)>),
}

impl Levels {
    fn len(&self) -> usize {
        match self {
            Levels::Exact(v) => v.len(),
            Levels::Ranges(r) => r.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChowLiuBn {
    /// `(parent, child)` pairs over dataset columns, in sampling order.
    pub edges: Vec<(usize, usize)>,
    /// Columns in topological order; the target comes first.
    pub order: Vec<usize>,
    /// Parent of each column (`None` for the root and skipped constants).
    pub parents: Vec<Option<usize>>,
    /// Per column: CPT rows indexed by parent code (a single row for roots).
    pub cpts: Vec<Vec<Vec<f64>>>,
    levels: Vec<Levels>,
    template: Dataset,
}

fn column_codes(x: &[f64], kind: ColumnKind, bins: usize) -> (Codes, Levels) {
    let codes = if kind == ColumnKind::Numeric {
        discretize(x, bins)
    } else {
        discretize(x, 2)
    };
    let mut lo = vec![f64::INFINITY; codes.levels];
    let mut hi = vec![f64::NEG_INFINITY; codes.levels];
    for (&c, &v) in codes.codes.iter().zip(x) {
        lo[c as usize] = lo[c as usize].min(v);
        hi[c as usize] = hi[c as usize].max(v);
    }
    let levels = if lo.iter().zip(&hi).all(|(a, b)| a == b) {
        Levels::Exact(lo)
    } else {
        Levels::Ranges(lo.into_iter().zip(hi).collect())
    };
    (codes, levels)
}

impl ChowLiuBn {
    pub fn fit(d: &Dataset, params: &BnParams) -> Result<Self> {
        if params.bins < 2 {
            return Err(Error::InvalidArgument(format!("bn bins must be >= 2, got {}", params.bins)));
        }
        if params.alpha.is_nan() || params.alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!("bn alpha must be > 0, got {}", params.alpha)));
        }
        if d.row_count() == 0 {
            return Err(Error::Empty("training data"));
        }
        let p = d.n_cols();
        let (codes, levels): (Vec<Codes>, Vec<Levels>) = (0..p)
            .map(|c| column_codes(d.values(c), d.column(c).kind, params.bins))
            .unzip();
        let root = d.target_index();
        let active: Vec<usize> = (0..p).filter(|&c| c == root || codes[c].levels > 1).collect();
        for c in (0..p).filter(|c| !active.contains(c)) {
            log::warn!("column {} is constant; left out of the tree", d.column(c).name);
        }

        // Prim's maximum spanning tree rooted at the target.
        let mut in_tree = vec![false; p];
        let mut best: Vec<(f64, usize)> = vec![(f64::NEG_INFINITY, usize::MAX); p];
        let mut parents = vec![None; p];
        let mut order = vec![root];
        let mut edges = Vec::new();
        in_tree[root] = true;
        let mut last = root;
        for _ in 1..active.len() {
            for &c in &active {
                if !in_tree[c] {
                    let mi = mutual_information_codes(&codes[last], &codes[c]).mi;
                    if mi > best[c].0 {
                        best[c] = (mi, last);
                    }
                }
            }
            let next = active
                .iter()
                .copied()
                .filter(|&c| !in_tree[c])
                .max_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(b.cmp(&a)))
                .expect("a column remains");
            in_tree[next] = true;
            parents[next] = Some(best[next].1);
            edges.push((best[next].1, next));
            order.push(next);
            last = next;
        }
        order.extend((0..p).filter(|c| !active.contains(c)));

        let alpha = params.alpha;
        let cpts = (0..p)
            .map(|c| {
                let k = codes[c].levels;
                match parents[c] {
                    None => {
                        let mut counts = vec![alpha; k];
                        for &v in &codes[c].codes {
                            counts[v as usize] += 1.0;
                        }
                        normalize(&mut counts);
                        vec![counts]
                    }
                    Some(par) => {
                        let mut table = vec![vec![alpha; k]; codes[par].levels];
                        for (&pv, &v) in codes[par].codes.iter().zip(&codes[c].codes) {
                            table[pv as usize][v as usize] += 1.0;
                        }
                        table.iter_mut().for_each(|row| normalize(row));
                        table
                    }
                }
            })
            .collect();
        Ok(Self {
            edges,
            order,
            parents,
            cpts,
            levels,
            template: d.select_rows(&[]),
        })
    }

    pub fn levels(&self, column: usize) -> usize {
        self.levels[column].len()
    }

    /// Ancestral sampling of `n` rows; numeric bins are mapped back by a
    /// uniform draw within the bin's observed range.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = rng::seeded(seed);
        let p = self.template.n_cols();
        let mut codes = vec![vec![0usize; n]; p];
        let mut values = vec![vec![0.0; n]; p];
        for r in 0..n {
            for &c in &self.order {
                let row = match self.parents[c] {
                    Some(par) => &self.cpts[c][codes[par][r]],
                    None => &self.cpts[c][0],
                };
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut k = row.len() - 1;
                for (j, &pj) in row.iter().enumerate() {
                    acc += pj;
                    if u < acc {
                        k = j;
                        break;
                    }
                }
                codes[c][r] = k;
                values[c][r] = match &self.levels[c] {
                    Levels::Exact(v) => v[k],
                    Levels::Ranges(ranges) => {
                        let (lo, hi) = ranges[k];
                        if hi > lo {
                            rng.random_range(lo..=hi)
                        } else {
                            lo
                        }
                    }
                };
            }
        }
        self.template.with_values(values)
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Fit a Chow-Liu tree and draw as many rows as the input has.
pub fn bn_fit_sample(d: &Dataset, params: &BnParams, seed: u64) -> Result<Dataset> {
    ChowLiuBn::fit(d, params)?.sample(d.row_count(), rng::derive(seed, 1))
}
