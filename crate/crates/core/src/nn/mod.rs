//! Minimal dense-network kernel: layers, activations, losses, exact
//! reverse-mode gradients and Adam. Double precision throughout.

mod adam;
mod checkpoint;
pub mod loss;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::Uniform;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Tanh,
    Sigmoid,
    /// Row-wise softmax over the whole layer output.
    Softmax,
    Identity,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::ReLU => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
            Activation::Sigmoid => z.mapv_inplace(sigmoid),
            Activation::Softmax => {
                for mut row in z.rows_mut() {
                    softmax_in_place(row.as_slice_mut().expect("standard layout"));
                }
            }
            Activation::Identity => {}
        }
    }

    /// Gradient w.r.t. pre-activation given the activation output `a` and
    /// the upstream gradient `g`.
    fn backward(self, a: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::ReLU => ndarray::Zip::from(a).and(g).map_collect(|&a, &g| if a > 0.0 { g } else { 0.0 }),
            Activation::Tanh => ndarray::Zip::from(a).and(g).map_collect(|&a, &g| g * (1.0 - a * a)),
            Activation::Sigmoid => ndarray::Zip::from(a).and(g).map_collect(|&a, &g| g * a * (1.0 - a)),
            Activation::Softmax => {
                let mut out = g.clone();
                for (mut o, s) in out.rows_mut().into_iter().zip(a.rows()) {
                    let dot: f64 = o.iter().zip(s.iter()).map(|(x, y)| x * y).sum();
                    o.zip_mut_with(&s, |oi, &si| *oi = si * (*oi - dot));
                }
                out
            }
            Activation::Identity => g.clone(),
        }
    }
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn softmax_in_place(x: &mut [f64]) {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in x.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in x.iter_mut() {
        *v /= s;
    }
}

/// Layer widths (input first) and one activation per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub seed: u64,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, activations: Vec<Activation>, seed: u64) -> Self {
        Self {
            layer_widths,
            activations,
            seed,
        }
    }

    /// Hidden layers share `hidden` activation; the output layer uses `out`.
    pub fn stack(input: usize, hidden: &[usize], output: usize, hidden_act: Activation, out: Activation, seed: u64) -> Self {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(output);
        let mut acts = vec![hidden_act; hidden.len()];
        acts.push(out);
        Self::new(widths, acts, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 || self.activations.len() != self.layer_widths.len() - 1 {
            return Err(Error::Shape(format!(
                "{} widths need {} activations, got {}",
                self.layer_widths.len(),
                self.layer_widths.len().saturating_sub(1),
                self.activations.len()
            )));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::Shape("layer widths must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Dense {
    /// `fan_in x fan_out`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub act: Activation,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    spec: MlpSpec,
    layers: Vec<Dense>,
    version: u64,
}

/// Intermediates saved by [`Mlp::forward`] for [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Cache {
    /// `inputs[i]` feeds layer `i`; the last entry is the network output.
    activations: Vec<Array2<f64>>,
    version: u64,
}

impl Cache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache holds at least the input")
    }
}

/// Parameter gradients, one `(dW, db)` pair per layer.
#[derive(Debug, Clone)]
pub struct Grads {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Grads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    /// Element-wise `self += other`.
    pub fn accumulate(&mut self, other: &Grads) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }
}

impl Mlp {
    /// Uniform `+-sqrt(6 / (fan_in + fan_out))` weights, zero biases.
    pub fn new(spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = rng::seeded(spec.seed);
        let layers = spec
            .layer_widths
            .windows(2)
            .zip(&spec.activations)
            .map(|(w, &act)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
                Dense {
                    w: Array2::from_shape_simple_fn((fan_in, fan_out), || rng.sample(dist)),
                    b: Array1::zeros(fan_out),
                    act,
                }
            })
            .collect();
        Ok(Self {
            spec,
            layers,
            version: 0,
        })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        self.version += 1;
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.spec.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.spec.layer_widths.last().expect("validated")
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "{} parameters for a network with {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = flat[off];
                off += 1;
            }
        }
        self.version += 1;
        Ok(())
    }

    /// Output plus the cache needed by [`Mlp::backward`].
    pub fn forward(&self, x: &Array2<f64>) -> Result<(Array2<f64>, Cache)> {
        if x.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {}",
                x.ncols(),
                self.input_width()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.as_standard_layout().into_owned());
        for l in &self.layers {
            let mut z = activations.last().expect("non-empty").dot(&l.w);
            z += &l.b;
            l.act.apply(&mut z);
            activations.push(z);
        }
        let out = activations.last().expect("non-empty").clone();
        Ok((
            out,
            Cache {
                activations,
                version: self.version,
            },
        ))
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.forward(x).map(|(y, _)| y)
    }

    /// Gradients of `sum(grad_out * output)` w.r.t. every parameter and the
    /// input batch.
    pub fn backward(&self, cache: &Cache, grad_out: &Array2<f64>) -> Result<(Grads, Array2<f64>)> {
        if cache.version != self.version {
            return Err(Error::InvalidArgument("stale forward cache: parameters changed since forward".into()));
        }
        if grad_out.dim() != cache.output().dim() {
            return Err(Error::Shape(format!(
                "output gradient {:?} vs output {:?}",
                grad_out.dim(),
                cache.output().dim()
            )));
        }
        let mut g = grad_out.clone();
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate().rev() {
            let dz = l.act.backward(&cache.activations[i + 1], &g);
            let input = &cache.activations[i];
            let dw = input.t().dot(&dz);
            let db = dz.sum_axis(Axis(0));
            g = dz.dot(&l.w.t());
            layers.push((dw, db));
        }
        layers.reverse();
        Ok((Grads { layers }, g))
    }

    /// One Adam update from `grads`.
    pub fn apply(&mut self, opt: &mut Adam, grads: &Grads) -> Result<()> {
        let mut params = self.params();
        opt.step(&mut params, &grads.flatten())?;
        self.set_params(&params)
    }
}
