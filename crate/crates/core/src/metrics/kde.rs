use serde::{Deserialize, Serialize};

pub const GRID_POINTS: usize = 256;
const BANDWIDTH_FLOOR: f64 = 1e-9;
/// Kernel contributions beyond this many bandwidths are dropped.
const CUTOFF: f64 = 8.0;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate on a fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Set when the sample is constant; the density is then a unit spike at
    /// the nearest grid point.
    pub point_mass: Option<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `0.9 min(sd, IQR / 1.34) n^(-1/5)`, floored at 1e-9. When the IQR is zero
/// the standard deviation alone is used.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return BANDWIDTH_FLOOR;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    (0.9 * spread * (n as f64).powf(-0.2)).max(BANDWIDTH_FLOOR)
}

pub fn trapezoid(grid: &[f64], y: &[f64]) -> f64 {
    grid.windows(2)
        .zip(y.windows(2))
        .map(|(g, v)| (g[1] - g[0]) * (v[0] + v[1]) / 2.0)
        .sum()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Density of `x` on `grid` with bandwidth `h`, normalized to unit
/// trapezoidal area.
pub fn kde_on_grid(x: &[f64], grid: &[f64]) -> KdeCurve {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let constant = sorted.first() == sorted.last();
    if sorted.is_empty() || constant {
        let c = sorted.first().copied().unwrap_or(0.0);
        let mut density = vec![0.0; grid.len()];
        let at = grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - c).abs().total_cmp(&(b.1 - c).abs()))
            .map_or(0, |(i, _)| i);
        density[at] = 1.0;
        let area = trapezoid(grid, &density);
        if area > 0.0 {
            density[at] /= area;
        }
        return KdeCurve {
            grid: grid.to_vec(),
            density,
            bandwidth: BANDWIDTH_FLOOR,
            point_mass: Some(c),
        };
    }
    let h = silverman_bandwidth(x);
    let norm = INV_SQRT_2PI / (h * sorted.len() as f64);
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&g| {
            let lo = sorted.partition_point(|&v| v < g - CUTOFF * h);
            let hi = sorted.partition_point(|&v| v <= g + CUTOFF * h);
            sorted[lo..hi]
                .iter()
                .map(|&v| {
                    let z = (g - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    let area = trapezoid(grid, &density);
    if area > 0.0 {
        density.iter_mut().for_each(|d| *d /= area);
    }
    KdeCurve {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
        point_mass: None,
    }
}

fn padded_grid(samples: &[&[f64]]) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut pad: f64 = 0.0;
    for x in samples {
        for &v in *x {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let (mn, mx) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if mx > mn {
            pad = pad.max(3.0 * silverman_bandwidth(x));
        }
    }
    if !lo.is_finite() {
        return linspace(-1.0, 1.0, GRID_POINTS);
    }
    if pad == 0.0 {
        pad = 1.0;
    }
    linspace(lo - pad, hi + pad, GRID_POINTS)
}

/// KDE of one sample on its own padded 256-point grid.
pub fn kde_estimate(x: &[f64]) -> KdeCurve {
    kde_on_grid(x, &padded_grid(&[x]))
}

/// Real and synthetic curves on one shared grid spanning both ranges.
pub fn kde_pair(real: &[f64], synth: &[f64]) -> (KdeCurve, KdeCurve) {
    let grid = padded_grid(&[real, synth]);
    (kde_on_grid(real, &grid), kde_on_grid(synth, &grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn standard_normal_matches_density() {
        let mut r = rng::seeded(21);
        let x: Vec<f64> = (0..100_000).map(|_| r.sample(StandardNormal)).collect();
        let k = kde_estimate(&x);
        assert_eq!(k.grid.len(), GRID_POINTS);
        assert!((trapezoid(&k.grid, &k.density) - 1.0).abs() < 0.01);
        let sup = k
            .grid
            .iter()
            .zip(&k.density)
            .map(|(&g, &d)| (d - INV_SQRT_2PI * (-0.5 * g * g).exp()).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 0.01, "sup error {sup}");
    }

    #[test]
    fn two_point_sample_is_symmetric() {
        let k = kde_estimate(&[0.0, 1.0]);
        let n = k.grid.len();
        for i in 0..n {
            assert!((k.grid[i] - 0.5 + k.grid[n - 1 - i] - 0.5).abs() < 1e-9);
            assert!((k.density[i] - k.density[n - 1 - i]).abs() < 1e-9);
        }
        assert!(k.density[n / 2] < k.density.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn constant_column_is_point_mass() {
        let k = kde_estimate(&[3.0; 10]);
        assert_eq!(k.point_mass, Some(3.0));
        assert!((trapezoid(&k.grid, &k.density) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silverman_hand_value() {
        // sd = sqrt(2.5), IQR = 2 on 1..=5
        let h = silverman_bandwidth(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let expected = 0.9 * (2.5f64.sqrt()).min(2.0 / 1.34) * 5f64.powf(-0.2);
        assert!((h - expected).abs() < 1e-12);
    }
}
