//! `key = value` settings files and the manifests echoed next to outputs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

use crate::UsageError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Rejects keys outside `allowed` and a `subcommand` entry naming a
    /// different command.
    pub fn check(&self, subcommand: &str, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if key == "subcommand" {
                if self.values[key] != subcommand {
                    bail!(UsageError(format!(
                        "config is for `{}`, not `{subcommand}`",
                        self.values[key]
                    )));
                }
            } else if !allowed.contains(&key.as_str()) {
                bail!(UsageError(format!("unknown config key `{key}` for `{subcommand}`")));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| UsageError(format!("config key `{key}`: {e}")).into()),
        }
    }

    /// Flag value if given, else the file's value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Resolved parameters of one invocation, written next to each output so the
/// run can be repeated with `--config`.
#[derive(Debug, Clone)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            entries: vec![("subcommand".into(), subcommand.into())],
        }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# ldcusum run manifest\n");
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Writes `<output>.manifest`.
    pub fn write_beside(&self, output: &Path) -> Result<()> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest");
        std::fs::write(&name, self.render()).with_context(|| format!("writing manifest for {}", output.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prefers_flags() {
        let c = Config::parse("# comment\nwindow = 100\n\nalpha=0.001\n").unwrap();
        assert_eq!(c.pick(None, "window", 50usize).unwrap(), 100);
        assert_eq!(c.pick(Some(20), "window", 50usize).unwrap(), 20);
        assert_eq!(c.pick(None, "runs", 300usize).unwrap(), 300);
        assert_eq!(c.pick_opt::<f64>(None, "alpha").unwrap(), Some(0.001));
        assert!(Config::parse("window 100").is_err());
        assert!(c.get::<usize>("alpha").is_err());
    }

    #[test]
    fn manifest_round_trips_through_config() {
        let mut m = Manifest::new("simulate");
        m.set("ar", "0.5").set("seed", 7);
        let c = Config::parse(&m.render()).unwrap();
        c.check("simulate", &["ar", "seed"]).unwrap();
        assert!(c.check("detect", &["ar", "seed"]).is_err());
        assert!(c.check("simulate", &["ar"]).is_err());
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
    }
}
