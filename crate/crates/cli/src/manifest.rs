//! Run manifests: which inputs (by content hash) and parameters produced
//! an artifact. Only file basenames are recorded so that the same inputs
//! give byte-identical artifacts wherever they live.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use elicit_core::hash::{content_hash, sha256_hex};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<InputRecord>,
    pub parameters: BTreeMap<String, Value>,
    /// Hash of the compact, key-sorted JSON of every other field.
    pub hash: String,
}

pub struct Builder {
    command: &'static str,
    inputs: Vec<InputRecord>,
    parameters: BTreeMap<String, Value>,
}

impl Builder {
    pub fn new(command: &'static str) -> Self {
        Builder {
            command,
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
        }
    }

    /// Records an input file that has already been read.
    pub fn input(&mut self, role: &str, path: &Path, bytes: &[u8]) -> &mut Self {
        self.inputs.push(InputRecord {
            role: role.to_string(),
            file: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(bytes),
        });
        self
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn finish(&self) -> Manifest {
        let mut m = Manifest {
            tool: "elicit",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            inputs: self.inputs.clone(),
            parameters: self.parameters.clone(),
            hash: String::new(),
        };
        let mut value = serde_json::to_value(&m).expect("serializable manifest");
        value.as_object_mut().expect("manifest is an object").remove("hash");
        m.hash = content_hash(&value);
        m
    }
}

/// Reads an input file and records it.
pub fn read_input(b: &mut Builder, role: &str, path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {role} {}", path.display()))?;
    b.input(role, path, &bytes);
    String::from_utf8(bytes).with_context(|| format!("{role} {} is not UTF-8", path.display()))
}

/// Pretty JSON of `body` with the manifest as a top-level `manifest` key.
pub fn artifact(manifest: &Manifest, body: impl Serialize) -> Result<String> {
    let mut value = serde_json::to_value(body)?;
    let map = value
        .as_object_mut()
        .context("artifact body must be a JSON object")?;
    map.insert("manifest".into(), serde_json::to_value(manifest)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}
