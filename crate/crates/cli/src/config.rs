//! Flat `key = value` run configuration, one pair per line, `#` comments.
//!
//! Commands read their keys through [`ConfigReader`]; every lookup records
//! the resolved value (user-supplied or default) so the run manifest echoes
//! the complete effective configuration, and any key never read is rejected
//! as unknown.

use crate::error::CliError;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

pub struct ConfigReader {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: Vec<(String, String)>,
}

impl ConfigReader {
    pub fn parse(text: &str) -> Result<ConfigReader, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", lineno + 1)));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(ConfigReader {
            values,
            used: BTreeSet::new(),
            resolved: Vec::new(),
        })
    }

    pub fn load(path: &Path) -> Result<ConfigReader, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn empty() -> ConfigReader {
        ConfigReader {
            values: BTreeMap::new(),
            used: BTreeSet::new(),
            resolved: Vec::new(),
        }
    }

    /// Forces a value (command-line override such as `--seed`).
    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    fn record(&mut self, key: &str, value: &str) {
        self.used.insert(key.to_string());
        self.resolved.push((key.to_string(), value.to_string()));
    }

    pub fn get_str(&mut self, key: &str, default: &str) -> String {
        let value = self
            .values
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.record(key, &value);
        value
    }

    pub fn get_opt_str(&mut self, key: &str) -> Option<String> {
        let value = self.values.get(key).cloned();
        let echo = value.clone().unwrap_or_default();
        self.record(key, &echo);
        value
    }

    pub fn require_path(&mut self, key: &str) -> Result<PathBuf, CliError> {
        match self.values.get(key).cloned() {
            Some(v) if !v.is_empty() => {
                self.record(key, &v);
                Ok(PathBuf::from(v))
            }
            _ => Err(CliError::Config(format!("missing required key `{key}`"))),
        }
    }

    pub fn get_f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.values.get(key).cloned() {
            None => {
                self.record(key, &format!("{default}"));
                Ok(default)
            }
            Some(v) => {
                let parsed: f64 = v
                    .parse()
                    .map_err(|_| CliError::Config(format!("key `{key}`: `{v}` is not a number")))?;
                self.record(key, &v);
                Ok(parsed)
            }
        }
    }

    pub fn get_usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.values.get(key).cloned() {
            None => {
                self.record(key, &format!("{default}"));
                Ok(default)
            }
            Some(v) => {
                let parsed: usize = v.parse().map_err(|_| {
                    CliError::Config(format!("key `{key}`: `{v}` is not a non-negative integer"))
                })?;
                self.record(key, &v);
                Ok(parsed)
            }
        }
    }

    pub fn get_u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.values.get(key).cloned() {
            None => {
                self.record(key, &format!("{default}"));
                Ok(default)
            }
            Some(v) => {
                let parsed: u64 = v.parse().map_err(|_| {
                    CliError::Config(format!("key `{key}`: `{v}` is not a non-negative integer"))
                })?;
                self.record(key, &v);
                Ok(parsed)
            }
        }
    }

    pub fn get_bool(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.values.get(key).cloned() {
            None => {
                self.record(key, if default { "true" } else { "false" });
                Ok(default)
            }
            Some(v) => {
                let parsed = match v.as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => {
                        return Err(CliError::Config(format!(
                            "key `{key}`: `{v}` is not a boolean"
                        )))
                    }
                };
                self.record(key, &v);
                Ok(parsed)
            }
        }
    }

    /// Comma-separated positive integers (hidden layer widths).
    pub fn get_usize_list(&mut self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.values.get(key).cloned() {
            None => {
                let echo = default
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(",");
                self.record(key, &echo);
                Ok(default.to_vec())
            }
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let n: usize = part.trim().parse().map_err(|_| {
                        CliError::Config(format!("key `{key}`: `{part}` is not an integer"))
                    })?;
                    out.push(n);
                }
                self.record(key, &v);
                Ok(out)
            }
        }
    }

    /// Rejects keys that no getter consumed and returns the resolved echo.
    pub fn finish(self) -> Result<Vec<(String, String)>, CliError> {
        for key in self.values.keys() {
            if !self.used.contains(key) {
                return Err(CliError::Config(format!("unknown key `{key}`")));
            }
        }
        Ok(self.resolved)
    }
}
