//! Benchmark datasets and plain-text data files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetName {
    /// `0.67 N(0, 1) + 0.33 N(0.3, 0.25^2)`: one heavy-tailed-looking mode.
    Lepto,
    /// `0.5 N(-1, 0.5^2) + 0.5 N(1, 0.5^2)`.
    Bimod,
}

impl DatasetName {
    pub fn name(self) -> &'static str {
        match self {
            DatasetName::Lepto => "lepto",
            DatasetName::Bimod => "bimod",
        }
    }

    /// One-based indices of the data whose component means are traced.
    pub fn default_monitored(self) -> &'static [usize] {
        match self {
            DatasetName::Lepto => &[1, 2],
            DatasetName::Bimod => &[2, 3],
        }
    }

    /// `(weight, mean, sd)` of each mixture component.
    pub fn components(self) -> [(f64, f64, f64); 2] {
        match self {
            DatasetName::Lepto => [(0.67, 0.0, 1.0), (0.33, 0.3, 0.25)],
            DatasetName::Bimod => [(0.5, -1.0, 0.5), (0.5, 1.0, 0.5)],
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lepto" => Ok(DatasetName::Lepto),
            "bimod" => Ok(DatasetName::Bimod),
            other => Err(Error::Config(format!("unknown dataset {other:?}"))),
        }
    }
}

/// `n` draws from the named mixture. Draws are generated one at a time from
/// a dedicated stream, so the first `m` values for any `n >= m` are the same.
pub fn generate_data(name: DatasetName, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, streams::DATA);
    let comps = name.components();
    (0..n)
        .map(|_| {
            let u: f64 = r.random();
            let (_, mean, sd) = if u < comps[0].0 { comps[0] } else { comps[1] };
            Normal::new(mean, sd).expect("valid normal").sample(&mut r)
        })
        .collect()
}

/// Reads real numbers separated by whitespace, commas or newlines; `#`
/// starts a comment.
pub fn parse_data(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("not a number: {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("non-finite value {tok:?}"),
                });
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("data file contains no values".into()));
    }
    Ok(out)
}

pub fn read_data_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read data file {}: {e}", path.display())))?;
    parse_data(&text)
}
