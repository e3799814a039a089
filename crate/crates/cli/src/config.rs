//! Optional `statepat.toml`. Keys mirror the long flags; flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{EnvArg, PatternArg};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub pattern: Option<PatternArg>,
    pub order: Option<Vec<OrderItem>>,
    pub env: Option<EnvArg>,
    pub limit: Option<usize>,
    pub out: Option<PathBuf>,
    pub trace_dir: Option<PathBuf>,
    pub script: Option<PathBuf>,
    pub port: Option<u32>,
}

pub const DEFAULT_FILE: &str = "statepat.toml";

/// Loads `explicit`, or `./statepat.toml` when it exists.
pub fn load(explicit: Option<&Path>) -> Result<Config, String> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None if Path::new(DEFAULT_FILE).is_file() => PathBuf::from(DEFAULT_FILE),
        None => return Ok(Config::default()),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OrderItem {
    Id(u32),
    Name(String),
}

impl OrderItem {
    pub fn to_arg(&self) -> String {
        match self {
            OrderItem::Id(id) => id.to_string(),
            OrderItem::Name(n) => n.clone(),
        }
    }
}
