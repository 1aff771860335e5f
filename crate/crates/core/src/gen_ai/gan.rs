use ndarray::{concatenate, s, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::condition::ConditionSampler;
use super::copula::CopulaTransform;
use super::encoding::{Block, BinaryStyle, TabularEncoder};
use super::{check_finite, LossTrace};
use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::nn::{loss, softmax_in_place, Activation, Adam, AdamConfig, Mlp, MlpSpec};
use crate::rng;

/// Real numeric offsets are clipped to the generator's output range.
const SCALAR_RANGE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GanParams {
    pub epochs: usize,
    pub batch: usize,
    pub noise_dim: usize,
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub max_modes: usize,
    /// Gumbel-softmax temperature.
    pub tau: f64,
}

impl Default for GanParams {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch: 512,
            noise_dim: 64,
            hidden: vec![128, 128],
            lr: 2e-4,
            max_modes: 10,
            tau: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
enum HeadSpan {
    Tanh(usize),
    Softmax { start: usize, width: usize },
}

/// Output activations applied on top of the generator's linear output.
#[derive(Debug, Clone)]
struct Head {
    spans: Vec<HeadSpan>,
    tau: f64,
}

impl Head {
    fn new(enc: &TabularEncoder, tau: f64) -> Self {
        let mut spans = Vec::new();
        for b in &enc.blocks {
            match *b {
                Block::Numeric {
                    scalar, modes, n_modes, ..
                } => {
                    spans.push(HeadSpan::Tanh(scalar));
                    spans.push(HeadSpan::Softmax {
                        start: modes,
                        width: n_modes,
                    });
                }
                Block::Discrete { start, .. } => spans.push(HeadSpan::Softmax { start, width: 2 }),
                Block::Binary { .. } => unreachable!("GAN encodes binaries as one-hot blocks"),
            }
        }
        Self { spans, tau }
    }

    /// `4 tanh` on scalars, gumbel-softmax on one-hot blocks.
    fn apply(&self, raw: &Array2<f64>, rng: &mut rng::Rng) -> Array2<f64> {
        let mut out = raw.clone();
        let mut buf = Vec::new();
        for mut row in out.rows_mut() {
            for span in &self.spans {
                match *span {
                    HeadSpan::Tanh(i) => row[i] = SCALAR_RANGE * row[i].tanh(),
                    HeadSpan::Softmax { start, width } => {
                        buf.clear();
                        for j in 0..width {
                            let u: f64 = rng.random_range(f64::EPSILON..1.0);
                            buf.push((row[start + j] - (-u.ln()).ln()) / self.tau);
                        }
                        softmax_in_place(&mut buf);
                        for j in 0..width {
                            row[start + j] = buf[j];
                        }
                    }
                }
            }
        }
        out
    }

    fn backward(&self, out: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
        let mut gr = g.clone();
        for (mut grow, orow) in gr.rows_mut().into_iter().zip(out.rows()) {
            for span in &self.spans {
                match *span {
                    HeadSpan::Tanh(i) => {
                        let t = orow[i] / SCALAR_RANGE;
                        grow[i] *= SCALAR_RANGE * (1.0 - t * t);
                    }
                    HeadSpan::Softmax { start, width } => {
                        let dot: f64 = (0..width).map(|j| grow[start + j] * orow[start + j]).sum();
                        for j in 0..width {
                            grow[start + j] = orow[start + j] * (grow[start + j] - dot) / self.tau;
                        }
                    }
                }
            }
        }
        gr
    }
}

/// Trained conditional generator.
#[derive(Debug, Clone)]
pub struct FittedGan {
    enc: TabularEncoder,
    cond: ConditionSampler,
    generator: Mlp,
    head: Head,
    target_block: usize,
    noise_dim: usize,
    batch: usize,
}

fn noise(rows: usize, cols: usize, rng: &mut rng::Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// Cross-entropy between each row's conditioned block logits and its
/// condition value.
fn condition_loss(raw: &Array2<f64>, picks: &[(usize, usize)]) -> (f64, Array2<f64>) {
    let n = raw.nrows() as f64;
    let mut grad = Array2::zeros(raw.dim());
    let mut value = 0.0;
    for (r, &(start, v)) in picks.iter().enumerate() {
        let mut p = [raw[[r, start]], raw[[r, start + 1]]];
        softmax_in_place(&mut p);
        value -= p[v].max(1e-300).ln();
        for j in 0..2 {
            grad[[r, start + j]] = (p[j] - f64::from(u8::from(j == v))) / n;
        }
    }
    (value / n, grad)
}

impl FittedGan {
    pub fn fit(d: &Dataset, params: &GanParams, seed: u64) -> Result<(Self, LossTrace)> {
        if params.batch < 32 {
            return Err(Error::InvalidArgument(format!("GAN batch must be >= 32, got {}", params.batch)));
        }
        if params.epochs == 0 {
            return Err(Error::InvalidArgument("GAN needs at least one epoch".into()));
        }
        let enc = TabularEncoder::fit(d, BinaryStyle::OneHot, params.max_modes, rng::derive(seed, 1))?;
        let data = enc.encode(d, Some(SCALAR_RANGE));
        let cond = ConditionSampler::new(&enc, &data)?;
        let target_block = cond
            .block_of_column(d.target_index())
            .ok_or_else(|| Error::Schema("target is not a binary column".into()))?;
        let (w, c) = (enc.width, cond.width());
        let mut generator = Mlp::new(MlpSpec::stack(
            params.noise_dim + c,
            &params.hidden,
            w,
            Activation::ReLU,
            Activation::Identity,
            rng::derive(seed, 2),
        ))?;
        let mut disc = Mlp::new(MlpSpec::stack(
            w + c,
            &params.hidden,
            1,
            Activation::ReLU,
            Activation::Identity,
            rng::derive(seed, 3),
        ))?;
        let adam = AdamConfig {
            lr: params.lr,
            beta1: 0.5,
            beta2: 0.9,
            eps: 1e-8,
        };
        let mut opt_g = Adam::new(adam, generator.param_count());
        let mut opt_d = Adam::new(adam, disc.param_count());
        let head = Head::new(&enc, params.tau);
        let mut rng = rng::seeded(rng::derive(seed, 4));
        let b = params.batch.min(d.row_count()).max(1);
        let steps = (d.row_count() / b).max(1);
        let ones = Array2::ones((b, 1));
        let zeros = Array2::zeros((b, 1));
        let mut trace = LossTrace::new(&["epoch", "d_loss", "g_loss", "cond_loss"]);
        let mut quiet_d = 0;
        for epoch in 0..params.epochs {
            let (mut sum_d, mut sum_g, mut sum_c) = (0.0, 0.0, 0.0);
            for _ in 0..steps {
                let mut cvec = Array2::zeros((b, c));
                let mut picks = Vec::with_capacity(b);
                let mut real = Array2::zeros((b, w));
                for r in 0..b {
                    let (cv, row) = cond.sample_train(&mut rng);
                    cvec.row_mut(r).assign(&ndarray::ArrayView1::from(&cv.encoding));
                    picks.push((cond.data_start(cv.selected_column), cv.selected_value));
                    real.row_mut(r).assign(&data.row(row));
                }

                let gin = concatenate![Axis(1), noise(b, params.noise_dim, &mut rng), cvec];
                let fake = head.apply(&generator.predict(&gin)?, &mut rng);
                let (yr, cache_r) = disc.forward(&concatenate![Axis(1), real, cvec])?;
                let (yf, cache_f) = disc.forward(&concatenate![Axis(1), fake, cvec])?;
                let (lr_, gr) = loss::bce_with_logits(&yr, &ones);
                let (lf, gf) = loss::bce_with_logits(&yf, &zeros);
                let (mut gd, _) = disc.backward(&cache_r, &gr)?;
                gd.accumulate(&disc.backward(&cache_f, &gf)?.0);
                disc.apply(&mut opt_d, &gd)
                    .map_err(|e| diverged("gan discriminator", epoch, e))?;

                let gin = concatenate![Axis(1), noise(b, params.noise_dim, &mut rng), cvec];
                let (raw, cache_g) = generator.forward(&gin)?;
                let fake = head.apply(&raw, &mut rng);
                let (yf, cache_f) = disc.forward(&concatenate![Axis(1), fake, cvec])?;
                let (lg, gy) = loss::bce_with_logits(&yf, &ones);
                let (_, gin_d) = disc.backward(&cache_f, &gy)?;
                let mut graw = head.backward(&fake, &gin_d.slice(s![.., ..w]).to_owned());
                let (lc, gc) = condition_loss(&raw, &picks);
                graw += &gc;
                let (gg, _) = generator.backward(&cache_g, &graw)?;
                generator
                    .apply(&mut opt_g, &gg)
                    .map_err(|e| diverged("gan generator", epoch, e))?;

                sum_d += lr_ + lf;
                sum_g += lg;
                sum_c += lc;
            }
            let k = steps as f64;
            let row = [epoch as f64, sum_d / k, sum_g / k, sum_c / k];
            check_finite("gan", epoch, &row)?;
            quiet_d = if row[1] < 1e-3 { quiet_d + 1 } else { 0 };
            if quiet_d == 10 {
                log::warn!("discriminator loss near zero for 10 epochs at epoch {epoch}: possible mode collapse");
            }
            trace.push(row.to_vec());
        }
        Ok((
            Self {
                enc,
                cond,
                generator,
                head,
                target_block,
                noise_dim: params.noise_dim,
                batch: b,
            },
            trace,
        ))
    }

    /// Rows generated under the given target values, one per entry. The
    /// emitted target equals its condition.
    pub fn sample_targets(&self, targets: &[usize], seed: u64) -> Result<Dataset> {
        let mut rng = rng::seeded(seed);
        let mut parts = Vec::new();
        for chunk in targets.chunks(self.batch.max(1)) {
            let mut cvec = Array2::zeros((chunk.len(), self.cond.width()));
            for (r, &t) in chunk.iter().enumerate() {
                cvec[[r, 2 * self.target_block + t]] = 1.0;
            }
            let gin = concatenate![Axis(1), noise(chunk.len(), self.noise_dim, &mut rng), cvec];
            let out = self.head.apply(&self.generator.predict(&gin)?, &mut rng);
            parts.push(self.enc.decode(&out)?);
        }
        let template = self.enc.template();
        let mut out = if parts.is_empty() {
            template.clone()
        } else {
            Dataset::concat(&parts)?
        };
        let mut values = std::mem::replace(&mut out, template.clone()).into_values();
        let t = template.target_index();
        for (v, &c) in values[t].iter_mut().zip(targets) {
            *v = c as f64;
        }
        template.with_values(values)
    }

    /// `n` rows with balanced target conditions (normal first).
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let targets: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        self.sample_targets(&targets, seed)
    }
}

fn diverged(model: &'static str, epoch: usize, e: Error) -> Error {
    match e {
        Error::Numerical(detail) => Error::NonFinite { model, epoch, detail },
        other => other,
    }
}

pub fn ctgan_fit_sample(d: &Dataset, params: &GanParams, seed: u64) -> Result<(Dataset, LossTrace)> {
    let (gan, trace) = FittedGan::fit(d, params, seed)?;
    Ok((gan.sample(d.row_count(), rng::derive(seed, 5))?, trace))
}

/// The conditional GAN trained on Gaussian-copula scores of the numeric
/// columns, mapped back through each column's inverse transform.
pub fn copulagan_fit_sample(d: &Dataset, params: &GanParams, seed: u64) -> Result<(Dataset, LossTrace)> {
    let mut transforms = Vec::with_capacity(d.n_cols());
    let mut scored = Vec::with_capacity(d.n_cols());
    for (c, col) in d.columns().iter().enumerate() {
        if col.kind == ColumnKind::Numeric {
            let t = CopulaTransform::fit(d.values(c))?;
            scored.push(d.values(c).iter().map(|&v| t.transform(v)).collect());
            transforms.push(Some(t));
        } else {
            scored.push(d.values(c).to_vec());
            transforms.push(None);
        }
    }
    let scored = d.with_values(scored)?;
    let (gan, trace) = FittedGan::fit(&scored, params, seed)?;
    let mut values = gan.sample(d.row_count(), rng::derive(seed, 5))?.into_values();
    for (col, t) in values.iter_mut().zip(&transforms) {
        if let Some(t) = t {
            col.iter_mut().for_each(|v| *v = t.inverse(*v));
        }
    }
    Ok((d.with_values(values)?, trace))
}
