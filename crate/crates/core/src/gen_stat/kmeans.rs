use rand::Rng;

use super::neighbors::{sq_dist, KdTree};
use super::{split_classes, MinMax};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Convergence when the summed squared centroid shift falls below
    /// `tol` times the mean per-dimension variance of the data.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// `k x dim`, row-major.
    pub centroids: Vec<f64>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

/// Fenwick tree over non-negative weights for sampling proportional to
/// weight without replacement.
struct WeightTree {
    tree: Vec<f64>,
}

impl WeightTree {
    fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            tree[i + 1] += w;
            let j = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if j <= n {
                tree[j] += tree[i + 1];
            }
        }
        Self { tree }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut s = 0.0;
        let mut j = self.tree.len() - 1;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    /// Smallest index whose prefix sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

fn nearest_center(point: &[f64], centers: &[f64], dim: usize) -> (usize, f64) {
    centers
        .chunks_exact(dim)
        .enumerate()
        .map(|(c, ctr)| (c, sq_dist(point, ctr)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Assign every point to its nearest centre.
fn assign(points: &[f64], centers: &[f64], dim: usize) -> Vec<(usize, f64)> {
    let k = centers.len() / dim;
    if k <= 32 {
        points.chunks_exact(dim).map(|p| nearest_center(p, centers, dim)).collect()
    } else {
        let tree = KdTree::new(centers, dim);
        points.chunks_exact(dim).map(|p| tree.nearest(p, 1, None)[0]).collect()
    }
}

/// k-means++ seeding. Centres are drawn proportional to squared distance to
/// the nearest chosen centre; for large `k` they are drawn in batches of
/// `ceil(k / 64)` between distance refreshes (exact k-means++ when the batch
/// size is 1).
fn seed_centers(points: &[f64], dim: usize, k: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let n = points.len() / dim;
    let batch = k.div_ceil(64).max(1);
    let mut centers = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(&points[first * dim..(first + 1) * dim]);
    let mut d2: Vec<f64> = points.chunks_exact(dim).map(|p| sq_dist(p, &centers[..dim])).collect();
    while centers.len() / dim < k {
        let take = batch.min(k - centers.len() / dim);
        let mut remaining = d2.clone();
        let mut weights = WeightTree::new(&remaining);
        let start = centers.len();
        for _ in 0..take {
            let total = weights.total();
            let pick = if total > 0.0 {
                weights.find(rng.random::<f64>() * total)
            } else {
                rng.random_range(0..n)
            };
            weights.add(pick, -remaining[pick]);
            remaining[pick] = 0.0;
            centers.extend_from_slice(&points[pick * dim..(pick + 1) * dim]);
        }
        let fresh = &centers[start..];
        for (p, best) in points.chunks_exact(dim).zip(d2.iter_mut()) {
            let (_, d) = nearest_center(p, fresh, dim);
            if d < *best {
                *best = d;
            }
        }
    }
    centers
}

/// Lloyd's algorithm from k-means++ seeds. Empty clusters are re-seeded at
/// the points farthest from their assigned centres.
pub fn kmeans(points: &[f64], dim: usize, k: usize, seed: u64, opts: KMeansOptions) -> Result<KMeansResult> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::Shape("point buffer is not n x dim".into()));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} for {n} points")));
    }
    let mut rng = rng::seeded(seed);
    let mut centers = seed_centers(points, dim, k, &mut rng);

    let mean: Vec<f64> = (0..dim)
        .map(|j| points.iter().skip(j).step_by(dim).sum::<f64>() / n as f64)
        .collect();
    let variance = points
        .chunks_exact(dim)
        .map(|p| sq_dist(p, &mean))
        .sum::<f64>()
        / (n * dim) as f64;
    let threshold = opts.tol * variance;

    let mut assignment = assign(points, &centers, dim);
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (p, &(c, _)) in points.chunks_exact(dim).zip(&assignment) {
            counts[c] += 1;
            for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut next = centers.clone();
        let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        for c in (0..k).filter(|&c| counts[c] > 0) {
            for j in 0..dim {
                next[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
            }
        }
        if !empty.is_empty() {
            let mut far: Vec<usize> = (0..n).collect();
            far.sort_by(|&a, &b| assignment[b].1.total_cmp(&assignment[a].1).then(a.cmp(&b)));
            for (&c, &p) in empty.iter().zip(&far) {
                next[c * dim..(c + 1) * dim].copy_from_slice(&points[p * dim..(p + 1) * dim]);
            }
        }
        let shift: f64 = centers.chunks_exact(dim).zip(next.chunks_exact(dim)).map(|(a, b)| sq_dist(a, b)).sum();
        centers = next;
        assignment = assign(points, &centers, dim);
        if shift <= threshold {
            break;
        }
    }
    Ok(KMeansResult {
        inertia: assignment.iter().map(|a| a.1).sum(),
        labels: assignment.into_iter().map(|a| a.0).collect(),
        centroids: centers,
        iterations,
    })
}

/// Cluster-centroid undersampling: the majority class is replaced by the
/// centroids of a k-means fit with `k` = minority count (on min-max scaled
/// features, mapped back to original units).
pub fn cluster_centroid_balance(d: &Dataset, seed: u64) -> Result<Dataset> {
    let split = split_classes(d)?;
    if split.majority.len() == split.minority.len() {
        return Ok(d.clone());
    }
    let features = d.feature_indices();
    let dim = features.len().max(1);
    let scaler = MinMax::fit(d, &features);
    let scaled = scaler.transform_rows(d, &features, &split.majority);
    let fit = kmeans(&scaled, dim, split.minority.len(), seed, KMeansOptions::default())?;

    let k = split.minority.len();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(2 * k); d.n_cols()];
    for ctr in fit.centroids.chunks_exact(dim) {
        for (j, &c) in features.iter().enumerate() {
            values[c].push(scaler.inverse(j, ctr[j]));
        }
        values[d.target_index()].push(split.majority_label);
    }
    for &r in &split.minority {
        for (c, col) in values.iter_mut().enumerate() {
            col.push(d.values(c)[r]);
        }
    }
    d.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::test_support::table;

    #[test]
    fn two_pairs_give_pair_means() {
        let pts = [0.0, 0.1, 0.2, 10.0, 10.1, 10.2];
        let fit = kmeans(&pts, 1, 2, 3, KMeansOptions::default()).unwrap();
        let mut c = fit.centroids.clone();
        c.sort_by(f64::total_cmp);
        assert!((c[0] - 0.1).abs() < 1e-12 && (c[1] - 10.1).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn identical_points() {
        let pts = vec![2.5; 3 * 8];
        let fit = kmeans(&pts, 3, 4, 1, KMeansOptions::default()).unwrap();
        assert!(fit.centroids.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn weight_tree_sampling() {
        let w = WeightTree::new(&[0.0, 2.0, 0.0, 1.0]);
        assert_eq!(w.total(), 3.0);
        assert_eq!(w.find(0.0), 1);
        assert_eq!(w.find(1.99), 1);
        assert_eq!(w.find(2.5), 3);
        let mut w = w;
        w.add(1, -2.0);
        assert_eq!(w.find(0.5), 3);
    }

    #[test]
    fn many_clusters_use_tree_assignment() {
        let mut rng = rng::seeded(8);
        let pts: Vec<f64> = (0..600).map(|_| rng.random_range(0.0..1.0)).collect();
        let fit = kmeans(&pts, 3, 150, 2, KMeansOptions::default()).unwrap();
        assert_eq!(fit.centroids.len(), 450);
        for (p, &label) in pts.chunks_exact(3).zip(&fit.labels) {
            let (best, d) = nearest_center(p, &fit.centroids, 3);
            assert!(best == label || sq_dist(p, &fit.centroids[label * 3..label * 3 + 3]) == d);
        }
    }

    #[test]
    fn centroid_balance_is_exact() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let flag: Vec<f64> = (0..30).map(|i| f64::from(u8::from(i % 3 == 0))).collect();
        let t: Vec<f64> = (0..30).map(|i| f64::from(u8::from(i % 5 == 0))).collect();
        let d = table(&[("x", x), ("flag", flag)], t);
        let out = cluster_centroid_balance(&d, 4).unwrap();
        assert_eq!(out.class_counts(), [6, 6]);
        assert_eq!(out.names(), d.names());
    }
}
