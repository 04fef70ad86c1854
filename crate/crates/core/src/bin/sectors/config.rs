//! Key=value config file with flag-over-file precedence.
//!
//! The file is plain `key = value` lines with `#` comments; keys use the
//! long flag names with underscores (`min_support_frac = 0.0005`). Values
//! given on the command line always win. The default config path comes from
//! the `SECTORS_CONFIG` environment variable when `--config` is absent.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const CONFIG_ENV_VAR: &str = "SECTORS_CONFIG";

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    path: Option<PathBuf>,
}

impl ConfigFile {
    /// Loads `--config` if given, else `$SECTORS_CONFIG` if set, else an
    /// empty config. A missing explicitly-requested file is an error; a
    /// missing env-var file is too (a broken pointer should not be silent).
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
        match path {
            Some(path) => Self::load(&path),
            None => Ok(Self::default()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let contents = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (line_no, raw) in contents.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected `key = value`, found {raw:?}",
                    path.display(),
                    line_no + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            values,
            path: Some(path.to_path_buf()),
        })
    }

    /// Typed lookup; config values only apply when the flag was not given.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                anyhow::anyhow!(
                    "config{}: key {key} = {raw:?}: {e}",
                    self.path
                        .as_deref()
                        .map(|p| format!(" {}", p.display()))
                        .unwrap_or_default()
                )
            }),
        }
    }

    /// flag value, else config value, else default.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(flag.or(self.get(key)?).unwrap_or(default))
    }

    /// flag value, else config value, else None.
    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(flag.or(self.get(key)?))
    }

    /// flag value, else config value, else an error naming the key.
    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.pick_opt(flag, key)?
            .ok_or_else(|| anyhow::anyhow!("missing required option --{}", key.replace('_', "-")))
    }
}
