use rand::Rng;

use super::encoding::{Block, TabularEncoder};
use crate::error::{Error, Result};
use crate::rng;

/// One conditioning choice: a discrete column, one of its values, and the
/// concatenated one-hot mask over all discrete columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVector {
    pub selected_column: usize,
    pub selected_value: usize,
    pub encoding: Vec<f64>,
}

#[derive(Debug, Clone)]
struct DiscreteBlock {
    column: usize,
    /// Column offset of the block inside the encoded data row.
    data_start: usize,
    rows: [Vec<usize>; 2],
    /// Log-frequency sampling weights of the two values.
    weights: [f64; 2],
}

/// Draws conditions by log-frequency and matching real rows.
#[derive(Debug, Clone)]
pub struct ConditionSampler {
    blocks: Vec<DiscreteBlock>,
}

impl ConditionSampler {
    pub fn new(enc: &TabularEncoder, data: &ndarray::Array2<f64>) -> Result<Self> {
        let mut blocks = Vec::new();
        for b in &enc.blocks {
            if let Block::Discrete { column, start } = *b {
                let mut rows: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
                for r in 0..data.nrows() {
                    rows[usize::from(data[[r, start + 1]] > 0.5)].push(r);
                }
                let weights = [(1.0 + rows[0].len() as f64).ln(), (1.0 + rows[1].len() as f64).ln()];
                blocks.push(DiscreteBlock {
                    column,
                    data_start: start,
                    rows,
                    weights,
                });
            }
        }
        if blocks.is_empty() {
            return Err(Error::Schema("conditional sampling needs at least one discrete column".into()));
        }
        Ok(Self { blocks })
    }

    /// Width of the condition vector: two slots per discrete column.
    pub fn width(&self) -> usize {
        2 * self.blocks.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Position of the discrete block for dataset column `column`.
    pub fn block_of_column(&self, column: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.column == column)
    }

    /// Offset of block `i` inside the encoded data row.
    pub fn data_start(&self, block: usize) -> usize {
        self.blocks[block].data_start
    }

    pub fn vector(&self, block: usize, value: usize) -> ConditionVector {
        let mut encoding = vec![0.0; self.width()];
        encoding[2 * block + value] = 1.0;
        ConditionVector {
            selected_column: block,
            selected_value: value,
            encoding,
        }
    }

    /// Uniform column, log-frequency value, then a uniformly chosen real row
    /// carrying that value.
    pub fn sample_train(&self, rng: &mut rng::Rng) -> (ConditionVector, usize) {
        let block = rng.random_range(0..self.blocks.len());
        let b = &self.blocks[block];
        let total = b.weights[0] + b.weights[1];
        let value = usize::from(rng.random::<f64>() * total >= b.weights[0]);
        let rows = &b.rows[value];
        let row = rows[rng.random_range(0..rows.len())];
        (self.vector(block, value), row)
    }
}
