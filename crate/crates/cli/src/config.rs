//! `key = value` experiment configs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Resolved settings of one run, kept sorted so the echo is stable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`, got `{raw}`", i + 1))?;
            let k = k.trim();
            if k.is_empty() {
                bail!("config line {}: empty key", i + 1);
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(ExperimentConfig { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn render(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn set_default(&mut self, key: &str, value: impl Display) {
        self.values.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.values.get(key).map(String::as_str).ok_or_else(|| anyhow!("missing required setting `{key}`"))
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.str(key)?;
        raw.parse().map_err(|e| anyhow!("invalid value `{raw}` for `{key}`: {e}"))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.opt_str(key) {
            None => Ok(None),
            Some(_) => self.get(key).map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.set("form1", "4/3,4/3,4/3");
        c.set("ymax", 100);
        c.set("h", 0.001);
        let back = ExperimentConfig::parse(&c.render()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.get::<f64>("ymax").unwrap(), 100.0);
    }

    #[test]
    fn comments_and_errors() {
        let c = ExperimentConfig::parse("# note\n a = 1 # trailing\n\nb=x").unwrap();
        assert_eq!(c.str("a").unwrap(), "1");
        assert!(c.get::<u32>("b").unwrap_err().to_string().contains("`b`"));
        assert!(ExperimentConfig::parse("novalue").is_err());
    }
}
