//! Flat key-value experiment configuration: a diffable text file of
//! `key = value` lines merged with command-line overrides. Every result file
//! echoes the fully resolved map so any row can be reproduced from the file
//! alone.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                );
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { map })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.map.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn get_parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key `{key}` = `{raw}`: {e}"),
            },
        }
    }

    /// The fully resolved map, sorted by key.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    /// Render as the same text format `parse` reads.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders_round_trip() {
        let text = "# comment\nbudget = 5000\npolicies = pm,pm-loc\n\nseed = 42\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.get("budget"), Some("5000"));
        assert_eq!(cfg.get_parse::<u64>("seed").unwrap(), Some(42));
        let again = Config::parse(&cfg.render()).unwrap();
        assert_eq!(again.entries(), cfg.entries());
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(Config::parse("budget 5000\n").is_err());
    }

    #[test]
    fn bad_typed_values_are_reported_with_the_key() {
        let cfg = Config::parse("repeats = many\n").unwrap();
        let err = cfg.get_parse::<usize>("repeats").unwrap_err().to_string();
        assert!(err.contains("repeats"));
    }
}
