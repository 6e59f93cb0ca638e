//! Run configuration and its flat `key = value` file format.
//!
//! Lines are `key = value`; `#` starts a comment; keys accept `-` or `_`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::HyperMu;
use crate::retro_conditional::GammaPrior;

use super::data::DatasetName;

pub const DESK_ITERATIONS: usize = 100_000;
pub const DESK_BURN_IN: usize = 10_000;
pub const FULL_ITERATIONS: usize = 2_000_000;
pub const FULL_BURN_IN: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    RetroMh,
    RetroExact,
    Neal8,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::RetroMh => "retro-mh",
            SamplerKind::RetroExact => "retro-exact",
            SamplerKind::Neal8 => "neal8",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "retro-mh" => Ok(SamplerKind::RetroMh),
            "retro-exact" => Ok(SamplerKind::RetroExact),
            "neal8" => Ok(SamplerKind::Neal8),
            other => Err(Error::Config(format!(
                "unknown sampler {other:?} (expected retro-mh, retro-exact or neal8)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    Named(DatasetName),
    File(PathBuf),
}

impl DatasetSource {
    pub fn label(&self) -> String {
        match self {
            DatasetSource::Named(n) => n.name().to_string(),
            DatasetSource::File(p) => p.display().to_string(),
        }
    }
}

impl FromStr for DatasetSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty dataset".into()));
        }
        Ok(match s.parse::<DatasetName>() {
            Ok(n) => DatasetSource::Named(n),
            Err(_) => DatasetSource::File(PathBuf::from(s)),
        })
    }
}

/// Concentration: fixed, or a gamma prior under which it is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSetting {
    Fixed(f64),
    Gamma(GammaPrior),
}

impl FromStr for AlphaSetting {
    type Err = Error;
    /// `1.5`, `gamma:2,1` or `gamma(2,1)` (shape, rate).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("gamma") {
            let inner = rest
                .trim_start_matches([':', '('])
                .trim_end_matches(')');
            let prior = parse_gamma_prior(inner)?;
            return Ok(AlphaSetting::Gamma(prior));
        }
        let v = parse_f64("alpha", s)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {s}")));
        }
        Ok(AlphaSetting::Fixed(v))
    }
}

pub fn parse_gamma_prior(s: &str) -> Result<GammaPrior> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("gamma prior needs `shape,rate`, got {s:?}")));
    }
    let shape = parse_f64("gamma shape", parts[0])?;
    let rate = parse_f64("gamma rate", parts[1])?;
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(Error::Config(format!("gamma prior needs positive shape and rate, got {s:?}")));
    }
    Ok(GammaPrior { shape, rate })
}

pub fn parse_hyper_mu(s: &str) -> Result<HyperMu> {
    match s.trim() {
        "midrange" => Ok(HyperMu::Midrange),
        "half-range" => Ok(HyperMu::HalfRange),
        other => Err(Error::Config(format!(
            "unknown hyper-mu {other:?} (expected midrange or half-range)"
        ))),
    }
}

fn parse_f64(what: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{what}: cannot parse {s:?} as a number")))
}

fn parse_usize(what: &str, s: &str) -> Result<usize> {
    let t = s.trim().replace('_', "");
    if let Ok(v) = t.parse::<usize>() {
        return Ok(v);
    }
    // allow 1e5-style counts
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e15 => Ok(v as usize),
        _ => Err(Error::Config(format!("{what}: cannot parse {s:?} as a count"))),
    }
}

fn parse_bool(what: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::Config(format!("{what}: expected a boolean, got {other:?}"))),
    }
}

/// Comma-separated one-based datum indices.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let v = parse_usize("monitor", t)?;
            if v == 0 {
                return Err(Error::Config("monitored indices are one-based".into()));
            }
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sampler: SamplerKind,
    pub dataset: DatasetSource,
    pub n: usize,
    pub alpha: AlphaSetting,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Seed for generating a named dataset; `None` uses `seed`.
    pub data_seed: Option<u64>,
    /// One-based datum indices whose component means are traced; `None`
    /// picks the dataset default.
    pub monitored: Option<Vec<usize>>,
    pub label_swap: bool,
    pub accelerations: bool,
    pub random_scan: bool,
    pub hyper_mu: HyperMu,
    /// Known component variance; required by `retro-exact`.
    pub fixed_variance: Option<f64>,
    pub m_aux: usize,
    pub full_scale: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerKind::RetroMh,
            dataset: DatasetSource::Named(DatasetName::Bimod),
            n: 100,
            alpha: AlphaSetting::Fixed(1.0),
            iterations: DESK_ITERATIONS,
            burn_in: DESK_BURN_IN,
            seed: 1,
            data_seed: None,
            monitored: None,
            label_swap: true,
            accelerations: true,
            random_scan: true,
            hyper_mu: HyperMu::Midrange,
            fixed_variance: None,
            m_aux: crate::marginal::DEFAULT_AUX,
            full_scale: false,
        }
    }
}

/// Splits a flat key-value text into `(key, value)` pairs in order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: format!("expected `key = value`, got {line:?}"),
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "empty key".into(),
            });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in parse_kv(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    /// Applies one setting; keys use the same names as the CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('_', "-").as_str() {
            "sampler" => self.sampler = value.parse()?,
            "dataset" => self.dataset = value.parse()?,
            "n" => self.n = parse_usize("n", value)?,
            "alpha" => self.alpha = value.parse()?,
            "iters" | "iterations" => self.iterations = parse_usize("iters", value)?,
            "burnin" | "burn-in" => self.burn_in = parse_usize("burnin", value)?,
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: cannot parse {value:?}")))?
            }
            "data-seed" => {
                self.data_seed = Some(
                    value
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("data-seed: cannot parse {value:?}")))?,
                )
            }
            "monitor" => self.monitored = Some(parse_index_list(value)?),
            "label-swap" => self.label_swap = parse_bool(key, value)?,
            "no-label-swap" => self.label_swap = !parse_bool(key, value)?,
            "accelerations" => self.accelerations = parse_bool(key, value)?,
            "random-scan" => self.random_scan = parse_bool(key, value)?,
            "update-alpha" => {
                if parse_bool(key, value)? {
                    self.enable_alpha_update(None);
                } else if let AlphaSetting::Gamma(p) = self.alpha {
                    self.alpha = AlphaSetting::Fixed(p.shape / p.rate);
                }
            }
            "alpha-prior" => self.enable_alpha_update(Some(parse_gamma_prior(value)?)),
            "hyper-mu" => self.hyper_mu = parse_hyper_mu(value)?,
            "fixed-variance" => {
                let v = parse_f64("fixed-variance", value)?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("fixed-variance must be positive, got {value}")));
                }
                self.fixed_variance = Some(v);
            }
            "m-aux" => self.m_aux = parse_usize("m-aux", value)?,
            "full-scale" => self.full_scale = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Switches on concentration sampling, with `Gamma(1, 1)` unless a prior
    /// is given or already configured.
    pub fn enable_alpha_update(&mut self, prior: Option<GammaPrior>) {
        let prior = prior.unwrap_or(match self.alpha {
            AlphaSetting::Gamma(p) => p,
            AlphaSetting::Fixed(_) => GammaPrior { shape: 1.0, rate: 1.0 },
        });
        self.alpha = AlphaSetting::Gamma(prior);
    }

    pub fn initial_alpha(&self) -> f64 {
        match self.alpha {
            AlphaSetting::Fixed(a) => a,
            AlphaSetting::Gamma(p) => p.shape / p.rate,
        }
    }

    pub fn alpha_prior(&self) -> Option<GammaPrior> {
        match self.alpha {
            AlphaSetting::Fixed(_) => None,
            AlphaSetting::Gamma(p) => Some(p),
        }
    }

    /// `(iterations, burn_in)` after applying `full_scale`.
    pub fn schedule(&self) -> (usize, usize) {
        if self.full_scale {
            (FULL_ITERATIONS, FULL_BURN_IN)
        } else {
            (self.iterations, self.burn_in)
        }
    }

    /// One-based monitored indices, falling back to the dataset default.
    pub fn monitored_indices(&self) -> Vec<usize> {
        match (&self.monitored, &self.dataset) {
            (Some(m), _) => m.clone(),
            (None, DatasetSource::Named(name)) => name.default_monitored().to_vec(),
            (None, DatasetSource::File(_)) => vec![1, 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (iters, burn) = self.schedule();
        if burn >= iters {
            return Err(Error::Config(format!("burn-in {burn} must be below iterations {iters}")));
        }
        if let DatasetSource::Named(_) = self.dataset {
            if self.n < 2 {
                return Err(Error::Config("named datasets need n >= 2".into()));
            }
        }
        if self.m_aux == 0 {
            return Err(Error::Config("m-aux must be at least 1".into()));
        }
        match self.sampler {
            SamplerKind::RetroExact if self.fixed_variance.is_none() => {
                return Err(Error::UnsupportedModel(
                    "retro-exact needs a bounded likelihood; set fixed-variance".into(),
                ))
            }
            SamplerKind::Neal8 if self.alpha_prior().is_some() => {
                return Err(Error::Config("alpha updates are only implemented for the conditional samplers".into()))
            }
            _ => {}
        }
        Ok(())
    }
}
