use rand::Rng;

use super::{append_rows, split_classes};
use crate::data::Dataset;
use crate::error::Result;
use crate::rng;

/// Random oversampling: duplicate uniformly drawn minority rows (with
/// replacement) until both classes have the majority count.
pub fn ros_balance(d: &Dataset, seed: u64) -> Result<Dataset> {
    let split = split_classes(d)?;
    let need = split.majority.len() - split.minority.len();
    let mut rng = rng::seeded(seed);
    let rows: Vec<Vec<f64>> = (0..need)
        .map(|_| d.row(split.minority[rng.random_range(0..split.minority.len())]))
        .collect();
    append_rows(d, &rows)
}
