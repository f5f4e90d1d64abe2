//! Flat `key = value` configuration files.
//!
//! A config file supplies defaults for absent flags; explicit flags always
//! win. Keys use the long flag names (without the leading dashes). The key
//! set is global across subcommands — keys a subcommand does not use are
//! ignored — but a key outside the set is a usage error, as is a duplicate
//! or an unparsable line. Blank lines and lines starting with `#` are
//! skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::pipeline::AppError;

/// Union of the long flag names of every subcommand (minus `config`
/// itself, which cannot sensibly come from a config file).
const KNOWN_KEYS: &[&str] = &[
    "system",
    "a",
    "x0",
    "m",
    "dt",
    "noise",
    "height",
    "width",
    "seed",
    "out-dir",
    "input",
    "kernel",
    "sigma",
    "gamma",
    "alpha",
    "d",
    "true-count",
    "m-target",
    "rtol",
    "top-k",
    "pad-mode",
    "m0",
    "only",
];

/// Parsed configuration file contents.
#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Load a config file, or an empty configuration when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("config {}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(AppError::Usage(format!(
                    "config {} line {}: expected `key = value`, got `{line}`",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(AppError::Usage(format!(
                    "config {} line {}: unknown key `{key}`",
                    path.display(),
                    idx + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(AppError::Usage(format!(
                    "config {} line {}: duplicate key `{key}`",
                    path.display(),
                    idx + 1
                )));
            }
        }
        Ok(Config { entries })
    }

    /// Raw string value for a key, if present.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parsed value for a key; a present-but-unparsable value is a usage
    /// error naming the key.
    pub fn parsed<T>(&self, key: &str) -> Result<Option<T>, AppError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                AppError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}"))
            }),
        }
    }

    /// Path-valued key.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }
}

/// Flag value if given, else config value, else the built-in default.
pub fn pick<T>(flag: Option<T>, cfg: Result<Option<T>, AppError>, default: T) -> Result<T, AppError> {
    Ok(flag.or(cfg?).unwrap_or(default))
}

/// Flag value if given, else config value; `None` when neither is set.
pub fn pick_opt<T>(flag: Option<T>, cfg: Result<Option<T>, AppError>) -> Result<Option<T>, AppError> {
    Ok(flag.or(cfg?))
}
