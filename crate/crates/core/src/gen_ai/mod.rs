//! AI-based generators at toy scale: a Chow-Liu Bayesian network, a tabular
//! VAE, a conditional GAN with mode-specific normalization, its Gaussian
//! copula variant and a Gaussian diffusion model.

mod bn;
mod condition;
mod copula;
mod diffusion;
mod encoding;
mod gan;
mod mode;
mod tvae;

use std::path::Path;

pub use bn::{bn_fit_sample, BnParams, ChowLiuBn};
pub use condition::{ConditionSampler, ConditionVector};
pub use copula::CopulaTransform;
pub use diffusion::{diffusion_fit_sample, reverse_sample, DiffusionParams, DiffusionSchedule, FittedDiffusion};
pub use encoding::{BinaryStyle, Block, TabularEncoder};
pub use gan::{copulagan_fit_sample, ctgan_fit_sample, FittedGan, GanParams};
pub use mode::{Mode, ModeNormalizer};
pub use tvae::{tvae_fit_sample, FittedTvae, TvaeParams};

use crate::data::write_atomic;
use crate::error::{Error, Result};

/// Per-epoch (or per-step) training diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl LossTrace {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

pub(crate) fn check_finite(model: &'static str, epoch: usize, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            model,
            epoch,
            detail: format!("loss values {values:?}"),
        })
    }
}
