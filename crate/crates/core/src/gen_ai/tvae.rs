use ndarray::{concatenate, s, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::encoding::{Block, BinaryStyle, TabularEncoder};
use super::{check_finite, LossTrace};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{sigmoid, softmax_in_place, Activation, Adam, AdamConfig, Mlp, MlpSpec};
use crate::rng;

const SIGMA_RANGE: (f64, f64) = (0.01, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TvaeParams {
    pub epochs: usize,
    pub batch: usize,
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub max_modes: usize,
}

impl Default for TvaeParams {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch: 512,
            latent_dim: 16,
            hidden: vec![128, 128],
            lr: 1e-3,
            max_modes: 10,
        }
    }
}

/// Decoder plus the learned per-scalar noise scale.
#[derive(Debug, Clone)]
pub struct FittedTvae {
    enc: TabularEncoder,
    decoder: Mlp,
    /// `ln sigma` per numeric column, in block order.
    log_sigma: Vec<f64>,
    latent_dim: usize,
}

/// Reconstruction negative log-likelihood and its gradient w.r.t. the raw
/// decoder output and `ln sigma`.
fn reconstruction(
    enc: &TabularEncoder,
    out: &Array2<f64>,
    x: &Array2<f64>,
    log_sigma: &[f64],
) -> (f64, Array2<f64>, Vec<f64>) {
    let n = out.nrows() as f64;
    let mut grad = Array2::zeros(out.dim());
    let mut gsig = vec![0.0; log_sigma.len()];
    let mut value = 0.0;
    let mut buf = Vec::new();
    let mut si = 0;
    for b in &enc.blocks {
        match *b {
            Block::Numeric {
                scalar, modes, n_modes, ..
            } => {
                let ls = log_sigma[si];
                let inv_var = (-2.0 * ls).exp();
                for r in 0..out.nrows() {
                    let diff = out[[r, scalar]] - x[[r, scalar]];
                    value += 0.5 * diff * diff * inv_var + ls;
                    grad[[r, scalar]] = diff * inv_var / n;
                    gsig[si] += (1.0 - diff * diff * inv_var) / n;
                    buf.clear();
                    buf.extend((0..n_modes).map(|j| out[[r, modes + j]]));
                    softmax_in_place(&mut buf);
                    for j in 0..n_modes {
                        let t = x[[r, modes + j]];
                        if t == 1.0 {
                            value -= buf[j].max(1e-300).ln();
                        }
                        grad[[r, modes + j]] = (buf[j] - t) / n;
                    }
                }
                si += 1;
            }
            Block::Binary { at, .. } => {
                for r in 0..out.nrows() {
                    let z = out[[r, at]];
                    let t = x[[r, at]];
                    value += z.max(0.0) - z * t + (-z.abs()).exp().ln_1p();
                    grad[[r, at]] = (sigmoid(z) - t) / n;
                }
            }
            Block::Discrete { .. } => unreachable!("TVAE encodes binaries as logits"),
        }
    }
    (value / n, grad, gsig)
}

impl FittedTvae {
    pub fn fit(d: &Dataset, params: &TvaeParams, seed: u64) -> Result<(Self, LossTrace)> {
        if params.epochs == 0 || params.batch == 0 || params.latent_dim == 0 {
            return Err(Error::InvalidArgument("TVAE needs positive epochs, batch and latent size".into()));
        }
        let enc = TabularEncoder::fit(d, BinaryStyle::Logit, params.max_modes, rng::derive(seed, 1))?;
        let data = enc.encode(d, None);
        let w = enc.width;
        let l = params.latent_dim;
        let mut encoder = Mlp::new(MlpSpec::stack(
            w,
            &params.hidden,
            2 * l,
            Activation::ReLU,
            Activation::Identity,
            rng::derive(seed, 2),
        ))?;
        let mut rev_hidden = params.hidden.clone();
        rev_hidden.reverse();
        let mut decoder = Mlp::new(MlpSpec::stack(
            l,
            &rev_hidden,
            w,
            Activation::ReLU,
            Activation::Identity,
            rng::derive(seed, 3),
        ))?;
        let n_scalars = enc.blocks.iter().filter(|b| matches!(b, Block::Numeric { .. })).count();
        let mut log_sigma = vec![-1.0f64; n_scalars];
        let cfg = AdamConfig {
            lr: params.lr,
            ..AdamConfig::default()
        };
        let mut opt_e = Adam::new(cfg, encoder.param_count());
        let mut opt_d = Adam::new(cfg, decoder.param_count());
        let mut opt_s = Adam::new(cfg, n_scalars);
        let mut rng = rng::seeded(rng::derive(seed, 4));
        let mut order: Vec<usize> = (0..d.row_count()).collect();
        let mut trace = LossTrace::new(&["epoch", "loss", "reconstruction", "kl"]);
        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            let (mut sum_rec, mut sum_kl, mut batches) = (0.0, 0.0, 0.0);
            for chunk in order.chunks(params.batch) {
                let bsz = chunk.len() as f64;
                let x = data.select(Axis(0), chunk);
                let (h, cache_e) = encoder.forward(&x)?;
                let mu = h.slice(s![.., ..l]).to_owned();
                let logvar = h.slice(s![.., l..]).mapv(|v| v.clamp(-20.0, 20.0));
                let eps = Array2::from_shape_simple_fn(mu.dim(), || rng.sample::<f64, _>(StandardNormal));
                let std = logvar.mapv(|v| (0.5 * v).exp());
                let z = &mu + &(&std * &eps);
                let (out, cache_d) = decoder.forward(&z)?;
                let (rec, grad_out, gsig) = reconstruction(&enc, &out, &x, &log_sigma);
                let kl = 0.5 * (mu.mapv(|v| v * v) + logvar.mapv(f64::exp) - 1.0 - &logvar).sum() / bsz;
                let (gd, gz) = decoder.backward(&cache_d, &grad_out)?;
                let gmu = &gz + &(&mu / bsz);
                let glv = &gz * &eps * &std * 0.5 + logvar.mapv(|v| 0.5 * (v.exp() - 1.0) / bsz);
                let (ge, _) = encoder.backward(&cache_e, &concatenate![Axis(1), gmu, glv])?;
                let fail = |e| match e {
                    Error::Numerical(detail) => Error::NonFinite {
                        model: "tvae",
                        epoch,
                        detail,
                    },
                    other => other,
                };
                decoder.apply(&mut opt_d, &gd).map_err(fail)?;
                encoder.apply(&mut opt_e, &ge).map_err(fail)?;
                opt_s.step(&mut log_sigma, &gsig).map_err(fail)?;
                for v in &mut log_sigma {
                    *v = v.clamp(SIGMA_RANGE.0.ln(), SIGMA_RANGE.1.ln());
                }
                sum_rec += rec;
                sum_kl += kl;
                batches += 1.0;
            }
            let row = [epoch as f64, (sum_rec + sum_kl) / batches, sum_rec / batches, sum_kl / batches];
            check_finite("tvae", epoch, &row)?;
            if row[3] < 1e-3 {
                log::warn!("TVAE KL term {:.2e} at epoch {epoch}: posterior collapse", row[3]);
            }
            trace.push(row.to_vec());
        }
        Ok((
            Self {
                enc,
                decoder,
                log_sigma,
                latent_dim: l,
            },
            trace,
        ))
    }

    /// Decode standard-normal latents; numeric offsets get the learned
    /// noise, mode and binary heads are read by argmax and 0.5 threshold.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = rng::seeded(seed);
        let z = Array2::from_shape_simple_fn((n, self.latent_dim), || rng.sample::<f64, _>(StandardNormal));
        let mut out = self.decoder.predict(&z)?;
        let mut si = 0;
        for b in &self.enc.blocks {
            match *b {
                Block::Numeric { scalar, .. } => {
                    let sigma = self.log_sigma[si].exp();
                    for r in 0..n {
                        out[[r, scalar]] += sigma * rng.sample::<f64, _>(StandardNormal);
                    }
                    si += 1;
                }
                Block::Binary { at, .. } => out.column_mut(at).mapv_inplace(sigmoid),
                Block::Discrete { .. } => {}
            }
        }
        self.enc.decode(&out)
    }
}

pub fn tvae_fit_sample(d: &Dataset, params: &TvaeParams, seed: u64) -> Result<(Dataset, LossTrace)> {
    let (model, trace) = FittedTvae::fit(d, params, seed)?;
    Ok((model.sample(d.row_count(), rng::derive(seed, 5))?, trace))
}
