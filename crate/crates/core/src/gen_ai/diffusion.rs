use ndarray::{concatenate, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_finite, LossTrace};
use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::nn::{loss, Activation, Adam, AdamConfig, Mlp, MlpSpec};
use crate::rng;

const EMBED_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionParams {
    pub timesteps: usize,
    /// Optimizer steps.
    pub steps: usize,
    pub batch: usize,
    pub hidden: Vec<usize>,
    pub lr: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            timesteps: 100,
            steps: 1000,
            batch: 512,
            hidden: vec![256, 256],
            lr: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    pub betas: Vec<f64>,
    pub alpha_bars: Vec<f64>,
}

impl DiffusionSchedule {
    /// Linear betas from `1e-4` to `0.02` at 1000 steps, with both endpoints
    /// scaled by `1000 / t` for shorter chains.
    pub fn linear(t: usize) -> Result<Self> {
        if t < 2 {
            return Err(Error::InvalidArgument(format!("diffusion needs T >= 2, got {t}")));
        }
        let scale = 1000.0 / t as f64;
        let (lo, hi) = ((1e-4 * scale).min(0.999), (0.02 * scale).min(0.999));
        let betas = (0..t).map(|i| lo + (hi - lo) * i as f64 / (t - 1) as f64).collect();
        Self::from_betas(betas)
    }

    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.len() < 2 {
            return Err(Error::InvalidArgument("diffusion needs T >= 2".into()));
        }
        if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::InvalidArgument("betas must lie in (0, 1)".into()));
        }
        let mut alpha_bars = Vec::with_capacity(betas.len());
        let mut acc = 1.0;
        for b in &betas {
            acc *= 1.0 - b;
            alpha_bars.push(acc);
        }
        Ok(Self { betas, alpha_bars })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// `alpha_bar` for 1-based step `t`, with `alpha_bar(0) = 1`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    /// One ancestral step from `x_t` given predicted noise; `z` adds the
    /// posterior noise (skipped at `t = 1`).
    pub fn reverse_step(&self, x: &Array2<f64>, eps: &Array2<f64>, t: usize, z: Option<&Array2<f64>>) -> Array2<f64> {
        let beta = self.betas[t - 1];
        let ab = self.alpha_bar(t);
        let mean = (x - &(eps * (beta / (1.0 - ab).sqrt()))) / (1.0 - beta).sqrt();
        match z {
            Some(z) if t > 1 => {
                let var = beta * (1.0 - self.alpha_bar(t - 1)) / (1.0 - ab);
                mean + z * var.sqrt()
            }
            _ => mean,
        }
    }
}

fn timestep_embedding(t: &[usize], total: usize) -> Array2<f64> {
    let half = EMBED_DIM / 2;
    Array2::from_shape_fn((t.len(), EMBED_DIM), |(r, j)| {
        let freq = (-((j % half) as f64) * 1000f64.ln() / half as f64).exp();
        let phase = t[r] as f64 / total as f64 * 1000.0 * freq;
        if j < half {
            phase.sin()
        } else {
            phase.cos()
        }
    })
}

/// Per-column affine map into model space: numerics standardized, binaries
/// to `-1/+1`.
#[derive(Debug, Clone)]
struct Scaler {
    shift: Vec<f64>,
    scale: Vec<f64>,
    binary: Vec<bool>,
    bounds: Vec<(f64, f64)>,
}

impl Scaler {
    fn fit(d: &Dataset) -> Result<Self> {
        let n = d.row_count() as f64;
        let mut s = Self {
            shift: Vec::new(),
            scale: Vec::new(),
            binary: Vec::new(),
            bounds: Vec::new(),
        };
        for (c, col) in d.columns().iter().enumerate() {
            let x = d.values(c);
            s.bounds.push((
                x.iter().copied().fold(f64::INFINITY, f64::min),
                x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ));
            match col.kind {
                ColumnKind::Binary => {
                    s.shift.push(0.5);
                    s.scale.push(0.5);
                    s.binary.push(true);
                }
                ColumnKind::Numeric => {
                    let m = x.iter().sum::<f64>() / n;
                    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
                    s.shift.push(m);
                    s.scale.push(if sd > 0.0 { sd } else { 1.0 });
                    s.binary.push(false);
                }
                ColumnKind::Categorical => {
                    return Err(Error::Schema(format!("column {} is categorical", col.name)));
                }
            }
        }
        Ok(s)
    }

    fn forward(&self, d: &Dataset) -> Array2<f64> {
        Array2::from_shape_fn((d.row_count(), d.n_cols()), |(r, c)| {
            (d.values(c)[r] - self.shift[c]) / self.scale[c]
        })
    }

    fn inverse(&self, m: &Array2<f64>) -> Vec<Vec<f64>> {
        (0..m.ncols())
            .map(|c| {
                m.column(c)
                    .iter()
                    .map(|&v| {
                        if self.binary[c] {
                            f64::from(u8::from(v > 0.0))
                        } else {
                            (v * self.scale[c] + self.shift[c]).clamp(self.bounds[c].0, self.bounds[c].1)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FittedDiffusion {
    schedule: DiffusionSchedule,
    model: Mlp,
    scaler: Scaler,
    template: Dataset,
}

impl FittedDiffusion {
    pub fn fit(d: &Dataset, params: &DiffusionParams, seed: u64) -> Result<(Self, LossTrace)> {
        let schedule = DiffusionSchedule::linear(params.timesteps)?;
        if params.steps == 0 || params.batch == 0 {
            return Err(Error::InvalidArgument("diffusion needs positive steps and batch".into()));
        }
        if d.row_count() == 0 {
            return Err(Error::Empty("training data"));
        }
        let scaler = Scaler::fit(d)?;
        let data = scaler.forward(d);
        let w = d.n_cols();
        let mut model = Mlp::new(MlpSpec::stack(
            w + EMBED_DIM,
            &params.hidden,
            w,
            Activation::ReLU,
            Activation::Identity,
            rng::derive(seed, 1),
        ))?;
        let mut opt = Adam::new(
            AdamConfig {
                lr: params.lr,
                ..AdamConfig::default()
            },
            model.param_count(),
        );
        let mut rng = rng::seeded(rng::derive(seed, 2));
        let total = schedule.len();
        let b = params.batch.min(d.row_count());
        let mut trace = LossTrace::new(&["step", "loss"]);
        for step in 0..params.steps {
            let rows: Vec<usize> = (0..b).map(|_| rng.random_range(0..d.row_count())).collect();
            let ts: Vec<usize> = (0..b).map(|_| rng.random_range(1..=total)).collect();
            let x0 = data.select(Axis(0), &rows);
            let eps = Array2::from_shape_simple_fn((b, w), || rng.sample::<f64, _>(StandardNormal));
            let mut xt = x0.clone();
            for (r, &t) in ts.iter().enumerate() {
                let ab = schedule.alpha_bar(t);
                let (a, s) = (ab.sqrt(), (1.0 - ab).sqrt());
                for c in 0..w {
                    xt[[r, c]] = a * x0[[r, c]] + s * eps[[r, c]];
                }
            }
            let input = concatenate![Axis(1), xt, timestep_embedding(&ts, total)];
            let (pred, cache) = model.forward(&input)?;
            let (l, g) = loss::mse(&pred, &eps);
            check_finite("tabddpm", step, &[l])?;
            let (grads, _) = model.backward(&cache, &g)?;
            model.apply(&mut opt, &grads).map_err(|e| match e {
                Error::Numerical(detail) => Error::NonFinite {
                    model: "tabddpm",
                    epoch: step,
                    detail,
                },
                other => other,
            })?;
            trace.push(vec![step as f64, l / w as f64]);
        }
        Ok((
            Self {
                schedule,
                model,
                scaler,
                template: d.select_rows(&[]),
            },
            trace,
        ))
    }

    pub fn schedule(&self) -> &DiffusionSchedule {
        &self.schedule
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = rng::seeded(seed);
        let w = self.template.n_cols();
        let total = self.schedule.len();
        let start = Array2::from_shape_simple_fn((n, w), || rng.sample::<f64, _>(StandardNormal));
        let x = reverse_sample(&self.schedule, start, &mut rng, |x, t| {
            let input = concatenate![Axis(1), x.view(), timestep_embedding(&vec![t; x.nrows()], total)];
            self.model.predict(&input)
        })?;
        self.template.with_values(self.scaler.inverse(&x))
    }
}

/// Run the reverse chain from `x_T` with a noise predictor.
pub fn reverse_sample(
    schedule: &DiffusionSchedule,
    mut x: Array2<f64>,
    rng: &mut rng::Rng,
    mut predict: impl FnMut(&Array2<f64>, usize) -> Result<Array2<f64>>,
) -> Result<Array2<f64>> {
    for t in (1..=schedule.len()).rev() {
        let eps = predict(&x, t)?;
        let z = Array2::from_shape_simple_fn(x.dim(), || rng.sample::<f64, _>(StandardNormal));
        x = schedule.reverse_step(&x, &eps, t, Some(&z));
    }
    Ok(x)
}

pub fn diffusion_fit_sample(d: &Dataset, params: &DiffusionParams, seed: u64) -> Result<(Dataset, LossTrace)> {
    let (model, trace) = FittedDiffusion::fit(d, params, seed)?;
    Ok((model.sample(d.row_count(), rng::derive(seed, 3))?, trace))
}
