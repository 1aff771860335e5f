//! Method registry and the uniform generator interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gen_ai::{
    bn_fit_sample, copulagan_fit_sample, ctgan_fit_sample, diffusion_fit_sample, tvae_fit_sample, BnParams,
    DiffusionParams, GanParams, LossTrace, TvaeParams,
};
use crate::gen_stat::{adasyn_balance, cluster_centroid_balance, gmm_fit_sample, ros_balance, smote_balance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Statistical,
    Ai,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Statistical => "Non-AI (Statistical)",
            Category::Ai => "AI-Based (Classical + Generative)",
        }
    }
}

/// The ten built-in methods, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ros,
    Smote,
    Adasyn,
    Cc,
    Gmm,
    Bn,
    Tvae,
    Tabddpm,
    Ctgan,
    Copulagan,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Ros,
        Method::Smote,
        Method::Adasyn,
        Method::Cc,
        Method::Gmm,
        Method::Bn,
        Method::Tvae,
        Method::Tabddpm,
        Method::Ctgan,
        Method::Copulagan,
    ];

    /// Config / CLI identifier.
    pub fn key(self) -> &'static str {
        match self {
            Method::Ros => "ros",
            Method::Smote => "smote",
            Method::Adasyn => "adasyn",
            Method::Cc => "cc",
            Method::Gmm => "gmm",
            Method::Bn => "bn",
            Method::Tvae => "tvae",
            Method::Tabddpm => "tabddpm",
            Method::Ctgan => "ctgan",
            Method::Copulagan => "copulagan",
        }
    }

    /// Name as printed in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Method::Ros => "ROS",
            Method::Smote => "SMOTE",
            Method::Adasyn => "ADASYN",
            Method::Cc => "CC",
            Method::Gmm => "GMM",
            Method::Bn => "BN",
            Method::Tvae => "TVAE",
            Method::Tabddpm => "TABDDPM",
            Method::Ctgan => "CTGAN",
            Method::Copulagan => "CopulaGAN",
        }
    }

    pub fn category(self) -> Category {
        match self {
            Method::Ros | Method::Smote | Method::Adasyn | Method::Cc | Method::Gmm => Category::Statistical,
            _ => Category::Ai,
        }
    }

    pub fn index(self) -> usize {
        Method::ALL.iter().position(|&m| m == self).expect("registered")
    }

    pub fn generator(self, params: &MethodParams) -> BuiltinGenerator {
        BuiltinGenerator {
            method: self,
            params: params.clone(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Method::ALL
            .into_iter()
            .find(|m| m.key() == k || (k == "clustercentroids" && *m == Method::Cc))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method {s:?}; expected one of {}",
                    Method::ALL.map(Method::key).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeighborParams {
    pub k: usize,
}

impl Default for NeighborParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmParams {
    pub max_components: usize,
}

impl Default for GmmParams {
    fn default() -> Self {
        Self { max_components: 10 }
    }
}

/// Hyperparameters for every built-in method.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodParams {
    pub smote: NeighborParams,
    pub adasyn: NeighborParams,
    pub gmm: GmmParams,
    pub bn: BnParams,
    pub tvae: TvaeParams,
    pub tabddpm: DiffusionParams,
    pub ctgan: GanParams,
    pub copulagan: GanParams,
}

/// Synthetic table plus optional training diagnostics.
#[derive(Debug, Clone)]
pub struct Generated {
    pub data: Dataset,
    pub loss_trace: Option<LossTrace>,
}

/// Anything that turns a training table into a synthetic table with the
/// same schema. External methods plug in by implementing this.
pub trait Generator: Send + Sync {
    fn name(&self) -> String;
    fn category(&self) -> Category;
    fn generate(&self, train: &Dataset, seed: u64) -> Result<Generated>;
}

#[derive(Debug, Clone)]
pub struct BuiltinGenerator {
    pub method: Method,
    pub params: MethodParams,
}

impl Generator for BuiltinGenerator {
    fn name(&self) -> String {
        self.method.display_name().to_string()
    }

    fn category(&self) -> Category {
        self.method.category()
    }

    fn generate(&self, train: &Dataset, seed: u64) -> Result<Generated> {
        let p = &self.params;
        let plain = |data| Generated { data, loss_trace: None };
        let traced = |(data, trace)| Generated {
            data,
            loss_trace: Some(trace),
        };
        let out = match self.method {
            Method::Ros => plain(ros_balance(train, seed)?),
            Method::Smote => plain(smote_balance(train, p.smote.k, seed)?),
            Method::Adasyn => plain(adasyn_balance(train, p.adasyn.k, seed)?),
            Method::Cc => plain(cluster_centroid_balance(train, seed)?),
            Method::Gmm => plain(gmm_fit_sample(train, p.gmm.max_components, seed)?),
            Method::Bn => plain(bn_fit_sample(train, &p.bn, seed)?),
            Method::Tvae => traced(tvae_fit_sample(train, &p.tvae, seed)?),
            Method::Tabddpm => traced(diffusion_fit_sample(train, &p.tabddpm, seed)?),
            Method::Ctgan => traced(ctgan_fit_sample(train, &p.ctgan, seed)?),
            Method::Copulagan => traced(copulagan_fit_sample(train, &p.copulagan, seed)?),
        };
        if out.data.names() != train.names() {
            return Err(Error::Schema(format!("{} changed the column layout", self.method)));
        }
        Ok(out)
    }
}
