//! Plain-text `key = value` files used for run manifests and scenarios.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are trimmed and
//! may use `_` or `-` interchangeably; values run to the end of the line.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("key `{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("{0}")]
    Io(String),
}

/// Parsed entries, keyed by normalized name (`-` replaced by `_`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvFile {
    entries: BTreeMap<String, String>,
}

pub fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(KvError::Malformed { line: k + 1 })?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(KvError::Malformed { line: k + 1 });
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(KvError::Duplicate { line: k + 1, key });
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, KvError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KvError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, KvError> {
        self.get(key)
            .map(|v| {
                v.parse().map_err(|_| KvError::Value {
                    key: key.to_string(),
                    value: v.to_string(),
                })
            })
            .transpose()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Fails on the first key not in `allowed` (normalized comparison).
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), KvError> {
        match self
            .entries
            .keys()
            .find(|k| !allowed.iter().any(|a| normalize(a) == **k))
        {
            Some(k) => Err(KvError::Unknown(k.clone())),
            None => Ok(()),
        }
    }
}
