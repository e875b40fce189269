//! Optional JSON configuration. Keys mirror the long flags; a flag given on
//! the command line always wins over the file, and the file over defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub a: Option<f64>,
    pub ell: Option<u32>,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    pub nmax: Option<usize>,
    pub tol: Option<f64>,
    pub n: Option<usize>,
    pub energy: Option<f64>,
    pub xmin: Option<f64>,
    pub xmax: Option<f64>,
    pub samples: Option<usize>,
    pub dpsi: Option<bool>,
    pub crum: Option<usize>,
    pub delete: Option<Vec<usize>>,
    pub states: Option<usize>,
    pub verify: Option<bool>,
    pub half_width: Option<f64>,
    pub points: Option<usize>,
    pub levels: Option<usize>,
    pub study: Option<Vec<usize>>,
    pub suite: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// `flag`, else `config`, else `default`.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
