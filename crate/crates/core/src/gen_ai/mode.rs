use crate::error::{Error, Result};
use crate::gen_stat::{select_gmm, GmmOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

/// Mode-specific normalization of one numeric column: a 1-D Gaussian
/// mixture whose components encode each value as (offset within its mode in
/// standard deviations, mode index).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeNormalizer {
    modes: Vec<Mode>,
}

impl ModeNormalizer {
    /// Fit at most `max_modes` components, picked by BIC.
    pub fn fit(x: &[f64], max_modes: usize, seed: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty("mode normalizer input"));
        }
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let std = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if std == 0.0 || x.len() < 4 {
            return Ok(Self {
                modes: vec![Mode {
                    weight: 1.0,
                    mean,
                    std: if std > 0.0 { std } else { 1.0 },
                }],
            });
        }
        let z: Vec<f64> = x.iter().map(|v| (v - mean) / std).collect();
        let opts = GmmOptions {
            max_components: max_modes.max(1),
            bic_rows: 5_000,
            ..GmmOptions::default()
        };
        let model = select_gmm(&z, 1, seed, &opts)?;
        let total: f64 = model.components.iter().map(|c| c.weight).sum();
        let mut modes: Vec<Mode> = model
            .components
            .iter()
            .map(|c| Mode {
                weight: c.weight / total,
                mean: mean + std * c.mean[0],
                std: (std * c.covariance[0].sqrt()).max(std * 1e-6),
            })
            .collect();
        modes.sort_by(|a, b| a.mean.total_cmp(&b.mean));
        Ok(Self { modes })
    }

    pub fn from_modes(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() || modes.iter().any(|m| m.std <= 0.0 || m.weight < 0.0) {
            return Err(Error::InvalidArgument("modes need positive std and weight".into()));
        }
        let total: f64 = modes.iter().map(|m| m.weight).sum();
        Ok(Self {
            modes: modes
                .into_iter()
                .map(|m| Mode {
                    weight: m.weight / total,
                    ..m
                })
                .collect(),
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Index of the mode with the highest posterior for `v`.
    pub fn responsible(&self, v: f64) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, m) in self.modes.iter().enumerate() {
            let z = (v - m.mean) / m.std;
            let lp = m.weight.ln() - m.std.ln() - 0.5 * z * z;
            if lp > best.1 {
                best = (k, lp);
            }
        }
        best.0
    }

    pub fn transform(&self, v: f64) -> (f64, usize) {
        let k = self.responsible(v);
        ((v - self.modes[k].mean) / self.modes[k].std, k)
    }

    pub fn inverse(&self, scalar: f64, mode: usize) -> f64 {
        let m = &self.modes[mode];
        scalar * m.std + m.mean
    }
}
