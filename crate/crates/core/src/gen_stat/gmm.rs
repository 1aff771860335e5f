use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::kmeans::{kmeans, KMeansOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Copy)]
pub struct GmmOptions {
    pub max_components: usize,
    /// Initial ridge added to every covariance diagonal; raised x10 up to
    /// 1e-2 when a covariance is not positive definite.
    pub reg: f64,
    /// Convergence threshold on the change of mean per-row log-likelihood.
    pub tol: f64,
    pub max_iter: usize,
    /// Rows used for BIC model selection (the winner is refit on all rows).
    pub bic_rows: usize,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self {
            max_components: 10,
            reg: 1e-6,
            tol: 1e-4,
            max_iter: 200,
            bic_rows: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major `dim x dim`.
    pub covariance: Vec<f64>,
    chol: Vec<f64>,
    log_det: f64,
}

#[derive(Debug, Clone)]
pub struct GmmModel {
    pub dim: usize,
    pub components: Vec<GaussianComponent>,
    pub reg: f64,
}

/// Mean per-row log-likelihood after each E-step.
#[derive(Debug, Clone, Default)]
pub struct EmTrace {
    pub log_likelihoods: Vec<f64>,
    pub converged: bool,
}

/// Lower Cholesky factor, or `None` if `a` is not positive definite.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

impl GaussianComponent {
    fn new(weight: f64, mean: Vec<f64>, covariance: Vec<f64>) -> Option<Self> {
        let d = mean.len();
        let chol = cholesky(&covariance, d)?;
        let log_det = 2.0 * (0..d).map(|i| chol[i * d + i].ln()).sum::<f64>();
        Some(Self {
            weight,
            mean,
            covariance,
            chol,
            log_det,
        })
    }

    fn log_pdf(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let d = self.mean.len();
        // forward substitution: L z = x - mu
        let mut maha = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for (l, z) in self.chol[i * d..i * d + i].iter().zip(&scratch[..i]) {
                s -= l * z;
            }
            scratch[i] = s / self.chol[i * d + i];
            maha += scratch[i] * scratch[i];
        }
        -0.5 * (d as f64 * LN_2PI + self.log_det + maha)
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl GmmModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Free parameters of a full-covariance mixture.
    pub fn param_count(&self) -> usize {
        let k = self.components.len();
        let d = self.dim;
        (k - 1) + k * d + k * d * (d + 1) / 2
    }

    /// Total log-likelihood of row-major `points`.
    pub fn log_likelihood(&self, points: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.dim];
        let mut lp = vec![0.0; self.components.len()];
        points
            .chunks_exact(self.dim)
            .map(|x| {
                for (l, c) in lp.iter_mut().zip(&self.components) {
                    *l = c.weight.ln() + c.log_pdf(x, &mut scratch);
                }
                log_sum_exp(&lp)
            })
            .sum()
    }

    pub fn bic(&self, points: &[f64]) -> f64 {
        let n = points.len() / self.dim;
        -2.0 * self.log_likelihood(points) + self.param_count() as f64 * (n as f64).ln()
    }

    /// Draw `n` rows, row-major.
    pub fn sample(&self, n: usize, rng: &mut rng::Rng) -> Vec<f64> {
        let d = self.dim;
        let mut out = Vec::with_capacity(n * d);
        let mut z = vec![0.0; d];
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut comp = &self.components[self.components.len() - 1];
            for c in &self.components {
                acc += c.weight;
                if u < acc {
                    comp = c;
                    break;
                }
            }
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            for i in 0..d {
                let lz: f64 = (0..=i).map(|k| comp.chol[i * d + k] * z[k]).sum();
                out.push(comp.mean[i] + lz);
            }
        }
        out
    }
}

/// M-step from responsibilities (`n x k`, row-major), escalating the ridge
/// until every covariance factors.
fn m_step(points: &[f64], dim: usize, resp: &[f64], k: usize, reg: &mut f64) -> Result<Vec<GaussianComponent>> {
    let n = points.len() / dim;
    let mut nk = vec![10.0 * f64::EPSILON; k];
    let mut means = vec![0.0; k * dim];
    for (x, r) in points.chunks_exact(dim).zip(resp.chunks_exact(k)) {
        for c in 0..k {
            nk[c] += r[c];
            for j in 0..dim {
                means[c * dim + j] += r[c] * x[j];
            }
        }
    }
    for c in 0..k {
        for j in 0..dim {
            means[c * dim + j] /= nk[c];
        }
    }
    let mut covs = vec![0.0; k * dim * dim];
    let mut diff = vec![0.0; dim];
    for (x, r) in points.chunks_exact(dim).zip(resp.chunks_exact(k)) {
        for c in 0..k {
            if r[c] == 0.0 {
                continue;
            }
            for j in 0..dim {
                diff[j] = x[j] - means[c * dim + j];
            }
            let cov = &mut covs[c * dim * dim..(c + 1) * dim * dim];
            for a in 0..dim {
                let ra = r[c] * diff[a];
                for b in 0..=a {
                    cov[a * dim + b] += ra * diff[b];
                }
            }
        }
    }
    loop {
        let mut comps = Vec::with_capacity(k);
        for c in 0..k {
            let mut cov = covs[c * dim * dim..(c + 1) * dim * dim].to_vec();
            for a in 0..dim {
                for b in 0..=a {
                    let v = cov[a * dim + b] / nk[c];
                    cov[a * dim + b] = v;
                    cov[b * dim + a] = v;
                }
                cov[a * dim + a] += *reg;
            }
            match GaussianComponent::new(nk[c] / n as f64, means[c * dim..(c + 1) * dim].to_vec(), cov) {
                Some(g) => comps.push(g),
                None => break,
            }
        }
        if comps.len() == k {
            let total: f64 = comps.iter().map(|g| g.weight).sum();
            for g in &mut comps {
                g.weight /= total;
            }
            return Ok(comps);
        }
        if *reg >= 1e-2 {
            return Err(Error::Numerical("covariance singular even with 1e-2 regularization".into()));
        }
        *reg = (*reg * 10.0).min(1e-2);
        log::warn!("singular covariance; raising regularization to {reg:e}");
    }
}

/// E-step: responsibilities in place; returns total log-likelihood.
fn e_step(points: &[f64], dim: usize, comps: &[GaussianComponent], resp: &mut [f64]) -> f64 {
    let k = comps.len();
    let mut scratch = vec![0.0; dim];
    let mut total = 0.0;
    for (x, r) in points.chunks_exact(dim).zip(resp.chunks_exact_mut(k)) {
        for (rc, c) in r.iter_mut().zip(comps) {
            *rc = c.weight.ln() + c.log_pdf(x, &mut scratch);
        }
        let lse = log_sum_exp(r);
        total += lse;
        for rc in r.iter_mut() {
            *rc = (*rc - lse).exp();
        }
    }
    total
}

/// Fit a `k`-component full-covariance mixture by EM, initialised from a
/// short k-means run.
pub fn fit_gmm(points: &[f64], dim: usize, k: usize, seed: u64, opts: &GmmOptions) -> Result<(GmmModel, EmTrace)> {
    let n = points.len() / dim;
    if n < k.max(2) {
        return Err(Error::InvalidArgument(format!("{n} rows for {k} mixture components")));
    }
    let init = kmeans(
        points,
        dim,
        k,
        seed,
        KMeansOptions {
            max_iter: 20,
            tol: 1e-4,
        },
    )?;
    let mut resp = vec![0.0; n * k];
    for (i, &l) in init.labels.iter().enumerate() {
        resp[i * k + l] = 1.0;
    }
    let mut reg = opts.reg;
    let mut comps = m_step(points, dim, &resp, k, &mut reg)?;
    let mut trace = EmTrace::default();
    let mut best: Option<(f64, Vec<GaussianComponent>)> = None;
    for _ in 0..opts.max_iter {
        let ll = e_step(points, dim, &comps, &mut resp) / n as f64;
        if !ll.is_finite() {
            return Err(Error::Numerical("non-finite log-likelihood in EM".into()));
        }
        if best.as_ref().is_none_or(|(b, _)| ll >= *b) {
            best = Some((ll, comps.clone()));
        }
        let prev = trace.log_likelihoods.last().copied();
        trace.log_likelihoods.push(ll);
        if prev.is_some_and(|p| (ll - p).abs() < opts.tol) {
            trace.converged = true;
            break;
        }
        comps = m_step(points, dim, &resp, k, &mut reg)?;
    }
    if !trace.converged {
        log::warn!("EM did not converge in {} iterations (k = {k}); keeping best", opts.max_iter);
    }
    let comps = best.map(|(_, c)| c).unwrap_or(comps);
    Ok((GmmModel { dim, components: comps, reg }, trace))
}

/// Choose the component count in `1..=max_components` by BIC (ties to the
/// smaller model) on at most `bic_rows` rows, then refit it on all rows.
pub fn select_gmm(points: &[f64], dim: usize, seed: u64, opts: &GmmOptions) -> Result<GmmModel> {
    let n = points.len() / dim;
    let sel: Vec<f64> = if n > opts.bic_rows {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::seeded(rng::derive(seed, 0xB1C)));
        idx.truncate(opts.bic_rows);
        idx.sort_unstable();
        idx.iter().flat_map(|&i| points[i * dim..(i + 1) * dim].iter().copied()).collect()
    } else {
        points.to_vec()
    };
    let rows = sel.len() / dim;
    let mut best: Option<(f64, usize, GmmModel)> = None;
    for k in 1..=opts.max_components.min(rows / 2).max(1) {
        let (model, _) = match fit_gmm(&sel, dim, k, rng::derive(seed, k as u64), opts) {
            Ok(m) => m,
            Err(e) if k > 1 => {
                log::warn!("GMM with {k} components failed: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let bic = model.bic(&sel);
        if best.as_ref().is_none_or(|(b, _, _)| bic < *b) {
            best = Some((bic, k, model));
        }
    }
    let (_, k, model) = best.ok_or_else(|| Error::Numerical("no GMM could be fit".into()))?;
    if rows == n {
        return Ok(model);
    }
    fit_gmm(points, dim, k, rng::derive(seed, k as u64), opts).map(|(m, _)| m)
}

/// Per-class GMMs on standardised features; draws the majority count of
/// rows for each class.
pub fn gmm_fit_sample(d: &Dataset, max_components: usize, seed: u64) -> Result<Dataset> {
    let opts = GmmOptions {
        max_components: max_components.max(1),
        ..GmmOptions::default()
    };
    gmm_fit_sample_with(d, &opts, seed)
}

pub(crate) fn gmm_fit_sample_with(d: &Dataset, opts: &GmmOptions, seed: u64) -> Result<Dataset> {
    let classes = d.class_rows();
    for (c, rows) in classes.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: c as u8,
                count: rows.len(),
                needed: 2,
            });
        }
    }
    let per_class = classes[0].len().max(classes[1].len());
    let features = d.feature_indices();
    let dim = features.len();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(2 * per_class); d.n_cols()];
    for (class, rows) in classes.iter().enumerate() {
        let mut mean = vec![0.0; dim];
        let mut scale = vec![1.0; dim];
        for (j, &c) in features.iter().enumerate() {
            let col = d.values(c);
            let m = rows.iter().map(|&r| col[r]).sum::<f64>() / rows.len() as f64;
            let var = rows.iter().map(|&r| (col[r] - m).powi(2)).sum::<f64>() / rows.len() as f64;
            mean[j] = m;
            if var > 0.0 {
                scale[j] = var.sqrt();
            }
        }
        let points: Vec<f64> = rows
            .iter()
            .flat_map(|&r| features.iter().enumerate().map(move |(j, &c)| (r, j, c)))
            .map(|(r, j, c)| (d.values(c)[r] - mean[j]) / scale[j])
            .collect();
        let class_seed = rng::derive(seed, class as u64);
        let model = select_gmm(&points, dim, class_seed, opts)?;
        log::info!("class {class}: {} GMM components", model.n_components());
        let drawn = model.sample(per_class, &mut rng::seeded(rng::derive(class_seed, 1)));
        for row in drawn.chunks_exact(dim) {
            for (j, &c) in features.iter().enumerate() {
                values[c].push(row[j] * scale[j] + mean[j]);
            }
            values[d.target_index()].push(class as f64);
        }
    }
    d.with_values(values)
}
