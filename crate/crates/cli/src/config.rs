//! `key=value` configuration files. Keys are flag names without the leading
//! dashes; `#` starts a comment. Values given on the command line take
//! precedence, then the file, then built-in defaults.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use retinet::{Error, Result};

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", n + 1)))?;
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("config line {}: duplicate key {key}", n + 1)));
            }
        }
        Ok(ConfigFile {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("config value {key}={v} is invalid")))
            })
            .transpose()
    }

    /// Fails on keys the command never asked for, so typos are not ignored.
    pub fn reject_unused(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(Error::Config(format!("unknown config key {k}"))),
            None => Ok(()),
        }
    }
}

pub trait Resolve<T> {
    /// Command-line value, else config value, else `default()`.
    fn resolve(self, cfg: &ConfigFile, key: &str, default: impl FnOnce() -> T) -> Result<T>;
}

impl<T: FromStr> Resolve<T> for Option<T> {
    fn resolve(self, cfg: &ConfigFile, key: &str, default: impl FnOnce() -> T) -> Result<T> {
        let from_file = cfg.get::<T>(key)?;
        Ok(self.or(from_file).unwrap_or_else(default))
    }
}
