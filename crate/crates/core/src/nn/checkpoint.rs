use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Activation, Mlp, MlpSpec};
use crate::data::write_atomic;
use crate::error::{Error, Result};

/// JSON manifest stored next to the flat little-endian `f64` parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub layer_widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub seed: u64,
    pub param_count: usize,
    pub layout: String,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Write `<stem>.bin` and `<stem>.json`, each through a temp-file rename.
pub fn save_checkpoint(net: &Mlp, stem: impl AsRef<Path>) -> Result<()> {
    let (bin, json) = paths(stem.as_ref());
    let params = net.params();
    let bytes: Vec<u8> = params.iter().flat_map(|v| v.to_le_bytes()).collect();
    let manifest = CheckpointManifest {
        layer_widths: net.spec().layer_widths.clone(),
        activations: net.spec().activations.clone(),
        seed: net.spec().seed,
        param_count: params.len(),
        layout: "per layer: weights (fan_in x fan_out, row-major) then bias; f64 little-endian".into(),
    };
    write_atomic(&bin, &bytes)?;
    write_atomic(&json, &serde_json::to_vec_pretty(&manifest)?)
}

pub fn load_checkpoint(stem: impl AsRef<Path>) -> Result<Mlp> {
    let (bin, json) = paths(stem.as_ref());
    let manifest: CheckpointManifest = serde_json::from_slice(&fs::read(&json).map_err(|e| Error::io(&json, e))?)?;
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() != manifest.param_count * 8 {
        return Err(Error::Shape(format!(
            "{} holds {} bytes, manifest expects {} parameters",
            bin.display(),
            bytes.len(),
            manifest.param_count
        )));
    }
    let params: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mut net = Mlp::new(MlpSpec::new(manifest.layer_widths, manifest.activations, manifest.seed))?;
    net.set_params(&params)?;
    Ok(net)
}
