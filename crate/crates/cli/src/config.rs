use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use netsynth_core::metrics::{CorrThresholds, PdThresholds};
use netsynth_core::{ForestParams, Method, MethodParams, Profile, SelectionRule, SplitSpec};

/// Rows kept from CIC-IDS2017 unless a subsample size is given.
pub const CIC_DEFAULT_SUBSAMPLE: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub profile: Profile,
    /// A CSV file or a directory of CSV files.
    pub path: PathBuf,
    /// Label column for the generic profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Stratified row cap. Unset means the profile default; 0 means all rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Generic,
            path: PathBuf::new(),
            target: None,
            subsample: None,
        }
    }
}

impl DatasetConfig {
    pub fn effective_subsample(&self) -> Option<usize> {
        match (self.subsample, self.profile) {
            (Some(0), _) => None,
            (Some(n), _) => Some(n),
            (None, Profile::CicIds2017) => Some(CIC_DEFAULT_SUBSAMPLE),
            (None, _) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Unset means the profile default: 25 features for NSL-KDD, the top
    /// quartile otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionRule>,
}

impl FeatureConfig {
    pub fn rule(&self, profile: Profile) -> SelectionRule {
        self.selection.unwrap_or(match profile {
            Profile::NslKdd => SelectionRule::Fixed(25),
            _ => SelectionRule::Quartile,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub corr: CorrThresholds,
    pub pd: PdThresholds,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Run methods on separate threads.
    pub parallel: bool,
    /// Also write each synthetic table as CSV.
    pub write_synthetic: bool,
    /// Render SVG charts next to the plot CSVs.
    pub svg: bool,
    /// Methods forced to fail, for exercising failure isolation.
    pub fail_methods: Vec<Method>,
}

/// Everything that determines a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub methods: Vec<Method>,
    pub dataset: DatasetConfig,
    pub features: FeatureConfig,
    pub split: SplitSpec,
    pub thresholds: Thresholds,
    pub classifier: ForestParams,
    pub run: RunOptions,
    pub params: MethodParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("netsynth-run"),
            methods: Method::ALL.to_vec(),
            dataset: DatasetConfig::default(),
            features: FeatureConfig::default(),
            split: SplitSpec::default(),
            thresholds: Thresholds::default(),
            classifier: ForestParams::default(),
            run: RunOptions::default(),
            params: MethodParams::default(),
        }
    }
}

/// Comments written above keys by [`RunConfig::documented_toml`].
const DOCS: &[(&str, &str)] = &[
    ("seed", "master seed; every per-method seed is derived from it"),
    ("output_dir", "run artifacts go here"),
    ("methods", "any of: ros smote adasyn cc gmm bn tvae tabddpm ctgan copulagan"),
    ("dataset.profile", "nsl-kdd | cic-ids2017 | generic"),
    ("dataset.path", "CSV file or directory of CSV files"),
    ("dataset.subsample", "stratified row cap; unset = profile default (100000 for cic-ids2017), 0 = all rows"),
    ("features.selection", "unset = 25 features for nsl-kdd, top quartile otherwise"),
    ("split.train_fraction", "real train share; test rows score both TRTR and TSTR"),
    ("thresholds.corr.mean_tol", "Corr = Yes iff mean |diff| <= mean_tol and max |diff| <= max_tol"),
    ("thresholds.pd.ks_threshold", "a variable differs when the KS statistic exceeds this"),
    ("thresholds.pd.max_rows", "per-side cap for the KS comparison"),
    ("classifier.trees", "bagged CART ensemble used for TRTR and TSTR"),
    ("run.parallel", "run methods concurrently"),
    ("run.fail_methods", "debugging aid: force these methods to fail"),
    ("params.tabddpm.steps", "optimizer steps"),
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// TOML with a comment line above each documented key.
    pub fn documented_toml(&self) -> Result<String> {
        let plain = self.to_toml()?;
        let mut out = String::new();
        let mut section = String::new();
        for line in plain.lines() {
            let trimmed = line.trim();
            let key = if trimmed.starts_with('[') {
                section = trimmed.trim_matches(|c| c == '[' || c == ']').to_string();
                section.clone()
            } else if let Some((k, _)) = trimmed.split_once(" = ") {
                if section.is_empty() {
                    k.to_string()
                } else {
                    format!("{section}.{k}")
                }
            } else {
                String::new()
            };
            if let Some((_, doc)) = DOCS.iter().find(|(k, _)| *k == key) {
                out.push_str("# ");
                out.push_str(doc);
                out.push('\n');
            }
            out.push_str(line);
            out.push('\n');
        }
        Ok(out)
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            bail!("method list is empty");
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            bail!("method list has duplicates");
        }
        if self.dataset.path.as_os_str().is_empty() {
            bail!("dataset.path is not set");
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            bail!("split.train_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}
