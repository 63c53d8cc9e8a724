//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Named experiment batteries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    PpcConvergence,
    EnergySlopes,
    PropHarness,
    RtSlopes,
    GeometrySweep,
}

impl Battery {
    pub const ALL: [Battery; 5] = [
        Battery::PpcConvergence,
        Battery::EnergySlopes,
        Battery::PropHarness,
        Battery::RtSlopes,
        Battery::GeometrySweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Battery::PpcConvergence => "ppc-convergence",
            Battery::EnergySlopes => "energy-slopes",
            Battery::PropHarness => "prop-harness",
            Battery::RtSlopes => "rt-slopes",
            Battery::GeometrySweep => "geometry-sweep",
        }
    }
}

impl fmt::Display for Battery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Battery::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownBattery(s.to_string()))
    }
}

/// Ordered key/value pairs read from a config file or set by a front end.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ExperimentConfig {
    /// One `key = value` per line; blank lines and `#` comments are skipped.
    /// Repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                reason: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(Error::Parse {
                    line,
                    reason: format!("invalid key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    reason: format!("missing value for `{key}`"),
                });
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Parse {
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(ExperimentConfig { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn battery(&self) -> Result<Battery> {
        self.get("battery")
            .ok_or_else(|| Error::param("config names no battery"))?
            .parse()
    }

    pub fn seed(&self) -> Result<u64> {
        self.parsed("seed", 0)
    }

    /// Rejects keys outside `allowed`.
    pub(crate) fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::param(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }

    pub(crate) fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::param(format!("cannot parse `{key} = {v}`"))),
        }
    }

    pub(crate) fn list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>> {
        let raw = self.get(key).unwrap_or(default);
        raw.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|_| Error::param(format!("cannot parse `{key}` item `{item}`")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let c = ExperimentConfig::parse(
            "# header\nbattery = rt-slopes\n\nseed=7  # trailing\nns = 32, 64,128\n",
        )
        .unwrap();
        assert_eq!(c.battery().unwrap(), Battery::RtSlopes);
        assert_eq!(c.seed().unwrap(), 7);
        assert_eq!(c.list::<usize>("ns", "1").unwrap(), vec![32, 64, 128]);
        assert_eq!(c.list::<f64>("eps", "0.05").unwrap(), vec![0.05]);
        assert_eq!(c.parsed("missing", 2.5).unwrap(), 2.5);
    }

    #[test]
    fn rejects_malformed_lines() {
        for (text, line) in [
            ("a = 1\nnonsense", 2),
            ("a = 1\na = 2", 2),
            ("=3", 1),
            ("a =", 1),
            ("a b = 1", 1),
        ] {
            match ExperimentConfig::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn battery_names_round_trip() {
        for b in Battery::ALL {
            assert_eq!(b.name().parse::<Battery>().unwrap(), b);
        }
        assert!(matches!(
            "nope".parse::<Battery>(),
            Err(Error::UnknownBattery(_))
        ));
        let c = ExperimentConfig::parse("battery = nope").unwrap();
        assert!(matches!(c.battery(), Err(Error::UnknownBattery(_))));
        assert!(c.seed().is_ok());
        assert!(ExperimentConfig::parse("seed = x").unwrap().seed().is_err());
    }

    #[test]
    fn key_whitelist() {
        let c = ExperimentConfig::parse("battery = rt-slopes\nextra = 1").unwrap();
        assert!(c.check_keys(&["battery"]).is_err());
        assert!(c.check_keys(&["battery", "extra"]).is_ok());
    }
}
