//! Exact k-nearest-neighbour search (squared Euclidean) over a KD-tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    d2: f64,
    idx: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

#[derive(Debug)]
enum Node {
    Leaf { start: usize, end: usize, uniform: bool },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

/// KD-tree over a flat row-major point buffer.
#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a [f64],
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && points.len() % dim == 0, "point buffer is not n x dim");
        let n = points.len() / dim;
        let mut tree = KdTree {
            points,
            dim,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for &i in &self.order[start..end] {
            let p = &self.points[i * self.dim..(i + 1) * self.dim];
            for d in 0..self.dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let (dim, spread) = (0..self.dim)
            .map(|d| (d, hi[d] - lo[d]))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if end - start <= LEAF_SIZE || spread <= 0.0 {
            self.nodes.push(Node::Leaf {
                start,
                end,
                uniform: spread <= 0.0,
            });
            return id;
        }
        let mid = start + (end - start) / 2;
        let (points, stride) = (self.points, self.dim);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * stride + dim].total_cmp(&points[b * stride + dim])
        });
        let value = points[self.order[mid] * stride + dim];
        self.nodes.push(Node::Split {
            dim,
            value,
            left: 0,
            right: 0,
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        if let Node::Split { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }

    /// The `k` nearest points to `query` as `(index, squared distance)`,
    /// nearest first, skipping `exclude`. Among exactly tied distances the
    /// choice is deterministic but not necessarily lowest-index.
    pub fn nearest(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.idx, c.d2)).collect()
    }

    fn search(&self, node: usize, q: &[f64], k: usize, exclude: Option<usize>, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end, uniform } => {
                let mut shared = None;
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d2 = if uniform {
                        *shared.get_or_insert_with(|| sq_dist(q, self.point(i)))
                    } else {
                        sq_dist(q, self.point(i))
                    };
                    if heap.len() < k {
                        heap.push(Candidate { d2, idx: i });
                    } else if d2 < heap.peek().map_or(f64::INFINITY, |c| c.d2) {
                        heap.pop();
                        heap.push(Candidate { d2, idx: i });
                    } else if uniform {
                        break;
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = q[dim] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, exclude, heap);
                let worst = heap.peek().map_or(f64::INFINITY, |c| c.d2);
                if heap.len() < k || diff * diff < worst {
                    self.search(far, q, k, exclude, heap);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute(points: &[f64], dim: usize, q: &[f64], k: usize, exclude: Option<usize>) -> Vec<f64> {
        let mut d: Vec<f64> = (0..points.len() / dim)
            .filter(|&i| Some(i) != exclude)
            .map(|i| sq_dist(q, &points[i * dim..(i + 1) * dim]))
            .collect();
        d.sort_by(f64::total_cmp);
        d.truncate(k);
        d
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for &(n, dim) in &[(300, 2), (500, 7), (200, 25)] {
            // quantized coordinates create plenty of exact ties and duplicates
            let pts: Vec<f64> = (0..n * dim).map(|_| f64::from(rng.random_range(0..6u8))).collect();
            let tree = KdTree::new(&pts, dim);
            for i in (0..n).step_by(7) {
                let q = &pts[i * dim..(i + 1) * dim];
                let got: Vec<f64> = tree.nearest(q, 5, Some(i)).into_iter().map(|(_, d)| d).collect();
                assert_eq!(got, brute(&pts, dim, q, 5, Some(i)));
            }
        }
    }

    #[test]
    fn duplicate_heavy_input() {
        let mut pts = vec![1.0; 2 * 1000];
        pts.extend([5.0, 5.0, 9.0, 9.0]);
        let tree = KdTree::new(&pts, 2);
        let nn = tree.nearest(&[1.0, 1.0], 3, Some(0));
        assert_eq!(nn.len(), 3);
        assert!(nn.iter().all(|&(i, d)| d == 0.0 && i != 0 && i < 1000));
        let far = tree.nearest(&[9.0, 9.0], 2, None);
        assert_eq!(far[0], (1001, 0.0));
        assert_eq!(far[1], (1000, 32.0));
    }
}
