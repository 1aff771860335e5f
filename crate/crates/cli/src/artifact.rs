use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use netsynth_core::data::write_atomic;

/// Seed and config hash stamped into every artifact of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stamp {
    pub seed: u64,
    pub config_hash: String,
}

impl Stamp {
    /// Comment line placed at the top of CSV artifacts.
    pub fn csv_header(&self) -> String {
        format!("# seed={} config_hash={}\n", self.seed, self.config_hash)
    }

    /// `{"seed", "config_hash", ...body}` as pretty JSON.
    pub fn json<T: Serialize>(&self, body: &T) -> Result<Vec<u8>> {
        let mut v = json!({ "seed": self.seed, "config_hash": self.config_hash });
        match serde_json::to_value(body)? {
            Value::Object(fields) => v.as_object_mut().expect("object").extend(fields),
            other => {
                v["data"] = other;
            }
        }
        let mut bytes = serde_json::to_vec_pretty(&v)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn write_json<T: Serialize>(&self, path: &Path, body: &T) -> Result<()> {
        write(path, &self.json(body)?)
    }

    pub fn write_csv(&self, path: &Path, body: &str) -> Result<()> {
        let mut text = self.csv_header();
        text.push_str(body);
        write(path, text.as_bytes())
    }

    /// Read the stamp back from a JSON artifact.
    pub fn from_json(v: &Value) -> Option<Self> {
        Some(Self {
            seed: v.get("seed")?.as_u64()?,
            config_hash: v.get("config_hash")?.as_str()?.to_string(),
        })
    }
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Read a stamped CSV artifact, skipping `#` comment lines.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| [l, "\n"]).collect();
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(body.as_bytes());
    r.records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect()
}
