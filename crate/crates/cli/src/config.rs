//! Flat JSON config files. Keys mirror the long flag names; a flag given on
//! the command line always wins over the file.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};

pub const SEED_ENV: &str = "VIVID_SEED";

const KNOWN_KEYS: &[&str] = &[
    "angle",
    "apply-out",
    "apply-to",
    "categorical",
    "cluster",
    "cluster-k",
    "connect",
    "convex-hull",
    "coords",
    "cutoff",
    "cutoff-quantile",
    "data",
    "eps",
    "fitlims",
    "grid-size",
    "height",
    "imp-lims",
    "importance-type",
    "int-lims",
    "int-threshold",
    "interaction",
    "importance",
    "k",
    "layout",
    "lims",
    "matrix",
    "max-depth",
    "method",
    "min-leaf",
    "n-ice",
    "n-trees",
    "nmax",
    "normalized",
    "num-perm",
    "out",
    "pool",
    "positive-class",
    "predictor",
    "remove-node",
    "reorder",
    "reps",
    "response",
    "seed",
    "table",
    "title",
    "top",
    "vars",
    "width",
    "workers",
    "zpath",
    "zpath-method",
];

#[derive(Debug, Default, Clone)]
pub struct Settings {
    file: Map<String, Value>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("bad config {}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(file) = value else {
            bail!("config must be a JSON object");
        };
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            bail!("unknown config key `{k}`");
        }
        Ok(Self { file })
    }

    /// Raw text of a config entry, in the same form a flag would take.
    fn text(&self, key: &str) -> Option<String> {
        self.file.get(key).map(|v| match v {
            Value::String(s) => s.clone(),
            Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        })
    }

    /// Flag value, else config value, else `None`.
    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.text(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config `{key}`: {e}")),
        }
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| anyhow!("missing --{key}"))
    }

    /// Seed from the flag, the config file, `VIVID_SEED`, then the default.
    pub fn seed(&self, flag: Option<u64>, default: u64) -> Result<u64> {
        if let Some(s) = self.get(flag, "seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| anyhow!("{SEED_ENV}=`{v}`: {e}")),
            Err(_) => Ok(default),
        }
    }
}

/// `lo,hi` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lims(pub f64, pub f64);

impl FromStr for Lims {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [lo, hi] = parts[..] else {
            return Err(format!("expected `lo,hi`, got `{s}`"));
        };
        let p = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        Ok(Lims(p(lo)?, p(hi)?))
    }
}

/// Comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List(pub Vec<String>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(List(
            s.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(str::to_string)
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file() {
        let s = Settings::from_json(r#"{"grid-size": 20, "imp-lims": [0, 8], "vars": ["a", "b"]}"#).unwrap();
        assert_eq!(s.or(None::<usize>, "grid-size", 50).unwrap(), 20);
        assert_eq!(s.or(Some(7usize), "grid-size", 50).unwrap(), 7);
        assert_eq!(s.or(None::<usize>, "nmax", 500).unwrap(), 500);
        assert_eq!(s.get(None::<Lims>, "imp-lims").unwrap(), Some(Lims(0.0, 8.0)));
        assert_eq!(
            s.get(None::<List>, "vars").unwrap(),
            Some(List(vec!["a".into(), "b".into()]))
        );
    }

    #[test]
    fn unknown_keys_and_bad_values() {
        assert!(Settings::from_json(r#"{"gird-size": 20}"#).is_err());
        assert!(Settings::from_json("[1]").is_err());
        let s = Settings::from_json(r#"{"grid-size": "many"}"#).unwrap();
        assert!(s.get(None::<usize>, "grid-size").is_err());
        assert!("1,2,3".parse::<Lims>().is_err());
    }
}
