//! Flat `key = value` run configuration files.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Ordered key/value pairs. Blank lines and `#` comments are skipped, keys
/// may use `-` or `_` interchangeably.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", k + 1);
            };
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                bail!("line {}: empty key", k + 1);
            }
            if entries.insert(key.clone(), (k + 1, value.trim().to_string())).is_some() {
                bail!("line {}: duplicate key {key}", k + 1);
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, &str)> {
        self.entries
            .iter()
            .map(|(k, (line, v))| (k.as_str(), *line, v.as_str()))
    }
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("bad value {value:?} for {key}: {e}"))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|s| parse_value(key, s.trim()))
        .collect()
}
