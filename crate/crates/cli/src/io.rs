//! Input digests, output writers and the run manifest.

use std::fs;
use std::path::Path;

use qaum::LabeledDataset;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Seeds {
    pub weight_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub seeds: Option<Seeds>,
    pub input: Option<InputDigest>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            seeds: None,
            input: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(mut self, out: &Path) -> CliResult<()> {
        let path = out.join("manifest.json");
        self.outputs.push(path.display().to_string());
        write_json(&path, &self)
    }
}

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub fn digest(path: &Path) -> CliResult<InputDigest> {
    let bytes = fs::read(path).map_err(|e| data_err(path, e))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
        bytes: bytes.len(),
    })
}

/// Loads and scales the dataset, refusing input that changed while it was read.
pub fn load_dataset(path: &Path) -> CliResult<(LabeledDataset, InputDigest)> {
    let before = digest(path)?;
    let raw = qaum::load_csv(path)?;
    if digest(path)?.sha256 != before.sha256 {
        return Err(data_err(path, "file changed while it was being read"));
    }
    Ok((raw.fit_scale()?, before))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| data_err(dir, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| data_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| data_err(path, e))
}

/// Writes a header row and then `rows`.
pub fn write_csv<R: IntoIterator<Item = Vec<String>>>(path: &Path, header: &[&str], rows: R) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| data_err(path, e))?;
    w.write_record(header).map_err(|e| data_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| data_err(path, e))?;
    }
    w.flush().map_err(|e| data_err(path, e))
}

pub fn read_json(path: &Path) -> CliResult<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| data_err(path, e))
}

