//! Synthetic tabular data generation and evaluation for intrusion-detection
//! datasets.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`]: CSV ingestion, cleaning, one-hot encoding, target binarization
//!   and seeded stratified splitting.
//! * [`featsel`]: plug-in entropy / mutual information estimators, Pearson
//!   correlation and top-quartile feature selection.
//! * [`gen_stat`]: ROS, SMOTE, ADASYN, cluster centroids and per-class GMMs.
//! * [`nn`]: a small dense-network kernel with exact reverse-mode gradients
//!   and Adam.
//! * [`gen_ai`]: Chow-Liu Bayesian network, tabular VAE, conditional GAN,
//!   copula GAN and Gaussian diffusion generators.
//! * [`metrics`]: data-structure, correlation, distribution and class-balance
//!   scoring.
//! * [`utility`]: bagged CART ensemble and the TRTR / TSTR protocol.
//!
//! Every generator is reachable through [`generator::Method`] and the
//! [`generator::Generator`] trait.

pub mod data;
pub mod error;
pub mod featsel;
pub mod gen_ai;
pub mod gen_stat;
pub mod generator;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod utility;

pub use data::{ColumnKind, ColumnSchema, Dataset, Profile, SplitSpec};
pub use error::{Error, Result};
pub use featsel::{MiRanking, SelectionRule};
pub use generator::{Category, Generator, Method, MethodParams};
pub use metrics::EvalReport;
pub use utility::{ForestParams, UtilityResult};




