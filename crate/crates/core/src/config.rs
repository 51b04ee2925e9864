//! Flat `key = value` configuration files and the small value grammars shared
//! with the command line.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Keys accepted in a configuration file; they mirror the long CLI flags.
pub const KNOWN_KEYS: [&str; 15] = [
    "suite",
    "geometry",
    "seed",
    "points",
    "tolerance",
    "epsilon",
    "grid",
    "fiber-volume",
    "eps-grid",
    "fit",
    "radius",
    "lens-order",
    "output",
    "format",
    "config",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Typed lookup; the error names the key.
    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidParameter(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped;
/// keys must be known and appear once.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty key".into(),
            });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(Config { entries })
}

fn parse_positive(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{s}` is not a number")))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::NonPositiveEpsilon(v))
    }
}

/// Comma-separated strictly positive ε values, e.g. `1,0.5,0.25`.
pub fn parse_eps_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::DegenerateGrid(0));
    }
    s.split(',').map(parse_positive).collect()
}

/// Quadrature resolution `N0xN1`, each at least 4.
pub fn parse_grid(s: &str) -> Result<[usize; 2]> {
    let (a, b) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::InvalidParameter(format!("grid `{s}` is not of the form N0xN1")))?;
    let parse = |t: &str| -> Result<usize> {
        let n: usize = t
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("grid `{s}` has a non-integer count")))?;
        if !(crate::quadrature::MIN_POINTS..=1 << 16).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "grid count {n} outside [{}, 65536]",
                crate::quadrature::MIN_POINTS
            )));
        }
        Ok(n)
    };
    Ok([parse(a)?, parse(b)?])
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::InvalidParameter(format!("`{other}` is not a boolean"))),
    }
}
