//! Flat TOML config mirroring the command-line flags. Flags win; relative
//! paths in the file are taken relative to the file's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// A problem with how the tool was invoked (exit status 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub input: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub repository: Option<PathBuf>,
    pub sample: Option<PathBuf>,
    pub justifications: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub split_seed: Option<u64>,
    pub train: Option<usize>,
    pub test: Option<usize>,
    pub m: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub condition: Option<String>,
    pub addr: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, Usage> {
        let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("config {}: {e}", path.display())))?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.input,
            &mut config.corpus,
            &mut config.repository,
            &mut config.sample,
            &mut config.justifications,
            &mut config.out,
            &mut config.table,
            &mut config.data_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

/// The flag value if given, else the config value.
pub fn pick<T: Clone>(flag: &Option<T>, config: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| config.clone())
}

pub fn require<T: Clone>(flag: &Option<T>, config: &Option<T>, name: &str) -> Result<T, Usage> {
    pick(flag, config).ok_or_else(|| Usage(format!("missing --{name} (flag or config key `{name}`)")))
}
