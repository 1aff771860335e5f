use ndarray::Array2;

use super::mode::ModeNormalizer;
use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::rng;

/// How binary columns appear in the encoded matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryStyle {
    /// One sigmoid output, thresholded at 0.5.
    Logit,
    /// Two-way one-hot block, decoded by argmax.
    OneHot,
}

#[derive(Debug, Clone)]
pub enum Block {
    Numeric {
        column: usize,
        scalar: usize,
        modes: usize,
        n_modes: usize,
        normalizer: ModeNormalizer,
    },
    Binary {
        column: usize,
        at: usize,
    },
    Discrete {
        column: usize,
        start: usize,
    },
}

impl Block {
    pub fn column(&self) -> usize {
        match *self {
            Block::Numeric { column, .. } | Block::Binary { column, .. } | Block::Discrete { column, .. } => column,
        }
    }
}

/// Reversible map from a dataset to the model-facing matrix.
#[derive(Debug, Clone)]
pub struct TabularEncoder {
    pub blocks: Vec<Block>,
    pub width: usize,
    pub style: BinaryStyle,
    template: Dataset,
    bounds: Vec<(f64, f64)>,
}

impl TabularEncoder {
    pub fn fit(d: &Dataset, style: BinaryStyle, max_modes: usize, seed: u64) -> Result<Self> {
        if d.row_count() == 0 {
            return Err(Error::Empty("training data"));
        }
        let mut blocks = Vec::with_capacity(d.n_cols());
        let mut width = 0;
        let mut bounds = Vec::with_capacity(d.n_cols());
        for (c, col) in d.columns().iter().enumerate() {
            let x = d.values(c);
            let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            bounds.push((lo, hi));
            match col.kind {
                ColumnKind::Numeric => {
                    let normalizer = ModeNormalizer::fit(x, max_modes, rng::derive(seed, c as u64))?;
                    let n_modes = normalizer.n_modes();
                    blocks.push(Block::Numeric {
                        column: c,
                        scalar: width,
                        modes: width + 1,
                        n_modes,
                        normalizer,
                    });
                    width += 1 + n_modes;
                }
                ColumnKind::Binary => match style {
                    BinaryStyle::Logit => {
                        blocks.push(Block::Binary { column: c, at: width });
                        width += 1;
                    }
                    BinaryStyle::OneHot => {
                        blocks.push(Block::Discrete { column: c, start: width });
                        width += 2;
                    }
                },
                ColumnKind::Categorical => {
                    return Err(Error::Schema(format!(
                        "column {} is categorical; encode categoricals first",
                        col.name
                    )))
                }
            }
        }
        Ok(Self {
            blocks,
            width,
            style,
            template: d.select_rows(&[]),
            bounds,
        })
    }

    pub fn template(&self) -> &Dataset {
        &self.template
    }

    /// Encoded rows; numeric offsets are clipped to `+-clip` when given.
    pub fn encode(&self, d: &Dataset, clip: Option<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((d.row_count(), self.width));
        for b in &self.blocks {
            let x = d.values(b.column());
            match b {
                Block::Numeric {
                    scalar,
                    modes,
                    normalizer,
                    ..
                } => {
                    for (r, &v) in x.iter().enumerate() {
                        let (s, k) = normalizer.transform(v);
                        out[[r, *scalar]] = clip.map_or(s, |c| s.clamp(-c, c));
                        out[[r, modes + k]] = 1.0;
                    }
                }
                Block::Binary { at, .. } => {
                    for (r, &v) in x.iter().enumerate() {
                        out[[r, *at]] = v;
                    }
                }
                Block::Discrete { start, .. } => {
                    for (r, &v) in x.iter().enumerate() {
                        out[[r, start + usize::from(v >= 0.5)]] = 1.0;
                    }
                }
            }
        }
        out
    }

    /// Decode activated model output: argmax over one-hot blocks, 0.5
    /// threshold on binary probabilities, numeric values clamped to the
    /// training range.
    pub fn decode(&self, m: &Array2<f64>) -> Result<Dataset> {
        if m.ncols() != self.width {
            return Err(Error::Shape(format!("decode width {} vs {}", m.ncols(), self.width)));
        }
        let rows = m.nrows();
        let mut values = vec![Vec::with_capacity(rows); self.template.n_cols()];
        for b in &self.blocks {
            let c = b.column();
            let (lo, hi) = self.bounds[c];
            let col = &mut values[c];
            for r in 0..rows {
                let v = match b {
                    Block::Numeric {
                        scalar,
                        modes,
                        n_modes,
                        normalizer,
                        ..
                    } => {
                        let k = argmax((0..*n_modes).map(|j| m[[r, modes + j]]));
                        normalizer.inverse(m[[r, *scalar]], k).clamp(lo, hi)
                    }
                    Block::Binary { at, .. } => f64::from(u8::from(m[[r, *at]] > 0.5)),
                    Block::Discrete { start, .. } => f64::from(u8::from(m[[r, start + 1]] > m[[r, *start]])),
                };
                col.push(v);
            }
        }
        self.template.with_values(values)
    }
}

pub(crate) fn argmax(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}
