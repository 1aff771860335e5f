use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Gaussian copula transform of one column: mid-rank empirical CDF clipped
/// to `[1/(n+1), n/(n+1)]`, then the standard normal quantile. The inverse
/// interpolates linearly between the same knots and clamps to the observed
/// range.
#[derive(Debug, Clone)]
pub struct CopulaTransform {
    /// Distinct sorted values.
    values: Vec<f64>,
    /// Normal score of each distinct value.
    scores: Vec<f64>,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

impl CopulaTransform {
    pub fn fit(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty("copula input"));
        }
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let norm = std_normal();
        let (lo, hi) = (1.0 / (n + 1.0), n / (n + 1.0));
        let mut values = Vec::new();
        let mut scores = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            // ties share the mid-rank (i + j + 1) / 2 on a 1-based scale
            let u = ((i + j) as f64 / 2.0 + 0.5) / n;
            values.push(sorted[i]);
            scores.push(norm.inverse_cdf(u.clamp(lo, hi)));
            i = j;
        }
        Ok(Self { values, scores })
    }

    pub fn transform(&self, v: f64) -> f64 {
        interpolate(&self.values, &self.scores, v)
    }

    pub fn inverse(&self, s: f64) -> f64 {
        interpolate(&self.scores, &self.values, s)
    }
}

/// Piecewise-linear map from knots `xs` to `ys`, flat outside the range.
fn interpolate(xs: &[f64], ys: &[f64], v: f64) -> f64 {
    if xs.len() == 1 || v <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if v >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&x| x <= v);
    let (x0, x1) = (xs[i - 1], xs[i]);
    ys[i - 1] + (ys[i] - ys[i - 1]) * (v - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn round_trip_within_half_rank_gap() {
        let mut r = rng::seeded(4);
        let x: Vec<f64> = (0..500).map(|_| r.random_range(-3.0..7.0f64).powi(3)).collect();
        let t = CopulaTransform::fit(&x).unwrap();
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        for (i, &v) in sorted.iter().enumerate() {
            let gap_lo = if i > 0 { v - sorted[i - 1] } else { f64::INFINITY };
            let gap_hi = if i + 1 < sorted.len() { sorted[i + 1] - v } else { f64::INFINITY };
            let err = (t.inverse(t.transform(v)) - v).abs();
            assert!(err <= 0.5 * gap_lo.min(gap_hi) + 1e-9, "value {v}: err {err}");
        }
    }

    #[test]
    fn inverse_clamps_to_observed_range() {
        let t = CopulaTransform::fit(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.inverse(-10.0), 1.0);
        assert_eq!(t.inverse(10.0), 4.0);
        assert_eq!(t.transform(2.0), t.transform(2.0));
        assert!(t.transform(1.0) < 0.0 && t.transform(4.0) > 0.0);
    }

    #[test]
    fn uniform_column_becomes_normal() {
        let mut r = rng::seeded(11);
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let t = CopulaTransform::fit(&x).unwrap();
        let s: Vec<f64> = x.iter().map(|&v| t.transform(v)).collect();
        let m = s.iter().sum::<f64>() / n as f64;
        let var = s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
        let skew = s.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n as f64 / var.powf(1.5);
        let kurt = s.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n as f64 / (var * var);
        assert!(skew.abs() < 0.1, "skew {skew}");
        assert!((kurt - 3.0).abs() < 0.3, "kurtosis {kurt}");
    }

    #[test]
    fn ties_share_one_score() {
        let t = CopulaTransform::fit(&[0.0, 0.0, 0.0, 5.0]).unwrap();
        // mid-rank of the tied block is 2 of 4
        let expected = std_normal().inverse_cdf(0.5);
        assert!((t.transform(0.0) - expected).abs() < 1e-12);
    }
}
