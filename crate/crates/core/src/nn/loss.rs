//! Losses averaged over the batch, returning `(value, d value / d input)`.

use ndarray::Array2;

use super::{sigmoid, softmax_in_place};

pub fn mse(pred: &Array2<f64>, target: &Array2<f64>) -> (f64, Array2<f64>) {
    let n = pred.nrows().max(1) as f64;
    let diff = pred - target;
    let value = diff.mapv(|d| d * d).sum() / n;
    (value, diff * (2.0 / n))
}

/// Binary cross-entropy on logits.
pub fn bce_with_logits(logits: &Array2<f64>, target: &Array2<f64>) -> (f64, Array2<f64>) {
    let n = logits.nrows().max(1) as f64;
    let mut value = 0.0;
    let grad = ndarray::Zip::from(logits).and(target).map_collect(|&z, &t| {
        // log(1 + e^z) - t z, computed stably
        value += z.max(0.0) - z * t + (-z.abs()).exp().ln_1p();
        (sigmoid(z) - t) / n
    });
    (value / n, grad)
}

/// Softmax cross-entropy over column block `[start, start + width)` of
/// `logits` against class indices.
pub fn softmax_cross_entropy_block(logits: &Array2<f64>, start: usize, width: usize, classes: &[usize]) -> (f64, Array2<f64>) {
    let n = logits.nrows().max(1) as f64;
    let mut grad = Array2::zeros(logits.dim());
    let mut value = 0.0;
    let mut p = vec![0.0; width];
    for (r, &class) in classes.iter().enumerate() {
        for (j, pj) in p.iter_mut().enumerate() {
            *pj = logits[[r, start + j]];
        }
        softmax_in_place(&mut p);
        value -= p[class].max(1e-300).ln();
        for j in 0..width {
            grad[[r, start + j]] = (p[j] - f64::from(u8::from(j == class))) / n;
        }
    }
    (value / n, grad)
}
