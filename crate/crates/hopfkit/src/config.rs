//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are the long flag names
//! (`k`, `l`, `radius`, `panels`, ...). A value given on the command line overrides the
//! file, and the file overrides the built-in default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::{CliError, Result};

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "k",
    "l",
    "radius",
    "coupling",
    "panels",
    "nodes",
    "out",
    "json",
    "quiet",
    "type",
    "intervals",
    "epsilon",
    "direct",
    "threshold",
    "residual-nodes",
    "profile",
    "plot-points",
    "k-max",
    "threads",
    "init",
    "kind",
    "steps",
    "tol",
    "recipe",
    "p",
    "grid",
    "predicate-tol",
    "residual-tol",
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// A parsed config file. The empty file is the default.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: PathBuf,
    entries: BTreeMap<String, Entry>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| CliError::Config {
                path: path.to_path_buf(),
                line,
                msg,
            };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, value) = t.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            let entry = Entry {
                value: value.to_string(),
                line,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(err(format!("`{key}` already set on line {}", prev.line)));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    fn error(&self, entry: &Entry, msg: String) -> CliError {
        CliError::Config {
            path: self.path.clone(),
            line: entry.line,
            msg,
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.entries
            .get(key)
            .map(|e| e.value.parse().map_err(|err| self.error(e, format!("{key}: {err}"))))
            .transpose()
    }

    pub fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|e| T::from_str(&e.value, false).map_err(|err| self.error(e, format!("{key}: {err}"))))
            .transpose()
    }

    /// Flag, then file, then `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => v,
            None => self.get_enum(key)?.unwrap_or(default),
        })
    }

    /// A switch is on when the flag is given or the file sets it to `true`.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.get(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_layers() {
        let f = ConfigFile::parse(Path::new("c"), "# run\nk = 3\n\nradius=2.5\nquiet = true\n").unwrap();
        assert_eq!(f.pick::<i64>(None, "k", 1).unwrap(), 3);
        assert_eq!(f.pick::<i64>(Some(5), "k", 1).unwrap(), 5);
        assert_eq!(f.pick::<i64>(None, "l", 1).unwrap(), 1);
        assert_eq!(f.pick::<f64>(None, "radius", 1.0).unwrap(), 2.5);
        assert!(f.switch(false, "quiet").unwrap());
        assert!(!f.switch(false, "json").unwrap());
    }

    #[test]
    fn reports_line_numbers() {
        let e = ConfigFile::parse(Path::new("c"), "k = 1\nbogus = 2\n").unwrap_err();
        assert!(e.to_string().contains(":2:"), "{e}");
        let e = ConfigFile::parse(Path::new("c"), "k = 1\n\nk = 2\n").unwrap_err();
        assert!(e.to_string().contains(":3:"), "{e}");
        let f = ConfigFile::parse(Path::new("c"), "\nk = x\n").unwrap();
        let e = f.get::<i64>("k").unwrap_err();
        assert!(e.to_string().contains(":2:"), "{e}");
    }
}
