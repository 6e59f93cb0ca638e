//! Trace files and the summaries derived from them.
//!
//! A trace is CSV. Its first line is a `#` metadata comment carrying the
//! format version, RNG and seed, the second the fixed column header, then
//! one record per retained iteration. Floats are written in Rust's shortest
//! round-trip form, so a parsed trace reproduces the in-memory one exactly.

use std::fmt::Write as _;
use std::io::Write;

use crate::diagnostics::{self, Window};
use crate::error::{Error, Result};

pub const TRACE_MAGIC: &str = "retrodp-trace";
pub const TRACE_VERSION: u32 = 1;
pub const FIXED_COLUMNS: [&str; 8] = [
    "iter",
    "M",
    "D",
    "N_star",
    "accept_rate_alloc",
    "swap_random_accepts",
    "swap_neighbor_accepts",
    "alpha",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub version: u32,
    pub sampler: String,
    pub rng: String,
    pub seed: u64,
    pub data_seed: u64,
    pub alpha_updated: bool,
    /// One-based monitored datum indices.
    pub monitored: Vec<usize>,
    pub n: usize,
    pub dataset: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub clusters: usize,
    pub deviance: f64,
    pub n_star: usize,
    pub accept_rate: f64,
    pub swap_random_accepts: usize,
    pub swap_neighbor_accepts: usize,
    pub alpha: f64,
    pub monitored: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

fn monitored_name(i: usize) -> String {
    format!("zK_{i}")
}

impl Trace {
    pub fn column_names(&self) -> Vec<String> {
        FIXED_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain(self.header.monitored.iter().map(|&i| monitored_name(i)))
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let h = &self.header;
        writeln!(
            w,
            "# {TRACE_MAGIC} v{} sampler={} rng={} seed={} data_seed={} alpha_updated={} n={} dataset={}",
            h.version, h.sampler, h.rng, h.seed, h.data_seed, h.alpha_updated, h.n, h.dataset
        )?;
        writeln!(w, "{}", self.column_names().join(","))?;
        let mut line = String::new();
        for r in &self.records {
            line.clear();
            write!(
                line,
                "{},{},{},{},{},{},{},{}",
                r.iter,
                r.clusters,
                r.deviance,
                r.n_star,
                r.accept_rate,
                r.swap_random_accepts,
                r.swap_neighbor_accepts,
                r.alpha
            )
            .expect("write to string");
            for v in &r.monitored {
                write!(line, ",{v}").expect("write to string");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, meta) = lines.next().ok_or_else(|| perr(1, "empty trace"))?;
        let header_partial = parse_meta(meta)?;
        let (_, cols) = lines.next().ok_or_else(|| perr(2, "missing column header"))?;
        let cols: Vec<&str> = cols.split(',').collect();
        if cols.len() < FIXED_COLUMNS.len() || cols[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
            return Err(perr(2, "unexpected column header"));
        }
        let monitored = cols[FIXED_COLUMNS.len()..]
            .iter()
            .map(|c| {
                c.strip_prefix("zK_")
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&i| i > 0)
                    .ok_or_else(|| perr(2, &format!("bad monitored column {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let header = TraceHeader {
            monitored,
            ..header_partial
        };
        let width = cols.len();
        let mut records = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != width {
                return Err(perr(lineno, &format!("expected {width} fields, got {}", f.len())));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|_| perr(lineno, &format!("bad integer {s:?}")));
            let real = |s: &str| s.parse::<f64>().map_err(|_| perr(lineno, &format!("bad number {s:?}")));
            records.push(TraceRecord {
                iter: int(f[0])?,
                clusters: int(f[1])?,
                deviance: real(f[2])?,
                n_star: int(f[3])?,
                accept_rate: real(f[4])?,
                swap_random_accepts: int(f[5])?,
                swap_neighbor_accepts: int(f[6])?,
                alpha: real(f[7])?,
                monitored: f[FIXED_COLUMNS.len()..].iter().map(|s| real(s)).collect::<Result<_>>()?,
            });
        }
        Ok(Trace { header, records })
    }

    /// The monitored functionals as named series: `M`, `D`, each `zK_i`,
    /// and `alpha` when it was sampled.
    pub fn functionals(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = vec![
            ("M".to_string(), self.records.iter().map(|r| r.clusters as f64).collect()),
            ("D".to_string(), self.records.iter().map(|r| r.deviance).collect()),
        ];
        for (c, &i) in self.header.monitored.iter().enumerate() {
            out.push((monitored_name(i), self.records.iter().map(|r| r.monitored[c]).collect()));
        }
        if self.header.alpha_updated {
            out.push(("alpha".to_string(), self.records.iter().map(|r| r.alpha).collect()));
        }
        out
    }
}

fn perr(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn parse_meta(line: &str) -> Result<TraceHeader> {
    let rest = line
        .strip_prefix("# ")
        .and_then(|s| s.strip_prefix(TRACE_MAGIC))
        .ok_or_else(|| perr(1, "not a trace file"))?;
    let rest = rest.trim_start();
    let (ver, rest) = rest.split_once(' ').ok_or_else(|| perr(1, "truncated metadata"))?;
    let version: u32 = ver
        .strip_prefix('v')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(1, "bad version"))?;
    if version != TRACE_VERSION {
        return Err(perr(1, &format!("unsupported trace version {version}")));
    }
    // `dataset` is last and may contain spaces.
    let (kv, dataset) = rest.split_once("dataset=").ok_or_else(|| perr(1, "missing dataset"))?;
    let mut sampler = None;
    let mut rng = None;
    let mut seed = None;
    let mut data_seed = None;
    let mut alpha_updated = None;
    let mut n = None;
    for tok in kv.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| perr(1, &format!("bad metadata {tok:?}")))?;
        match k {
            "sampler" => sampler = Some(v.to_string()),
            "rng" => rng = Some(v.to_string()),
            "seed" => seed = v.parse().ok(),
            "data_seed" => data_seed = v.parse().ok(),
            "alpha_updated" => alpha_updated = v.parse().ok(),
            "n" => n = v.parse().ok(),
            _ => return Err(perr(1, &format!("unknown metadata key {k:?}"))),
        }
    }
    let missing = |what| perr(1, &format!("missing or bad {what}"));
    Ok(TraceHeader {
        version,
        sampler: sampler.ok_or_else(|| missing("sampler"))?,
        rng: rng.ok_or_else(|| missing("rng"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        data_seed: data_seed.ok_or_else(|| missing("data_seed"))?,
        alpha_updated: alpha_updated.ok_or_else(|| missing("alpha_updated"))?,
        monitored: Vec::new(),
        n: n.ok_or_else(|| missing("n"))?,
        dataset: dataset.to_string(),
    })
}

/// IAT, mean and Monte Carlo error of one functional.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSummary {
    pub name: String,
    pub mean: f64,
    pub mcse: f64,
    pub tau: f64,
    pub tau_se: f64,
    pub window: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub sampler: String,
    pub seed: u64,
    pub samples: usize,
    pub accept_rate: f64,
    pub functionals: Vec<FunctionalSummary>,
}

impl Summary {
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        let functionals = trace
            .functionals()
            .into_iter()
            .map(|(name, values)| summarize_series(name, &values))
            .collect::<Result<Vec<_>>>()?;
        let rates: Vec<f64> = trace.records.iter().map(|r| r.accept_rate).filter(|r| r.is_finite()).collect();
        Ok(Self {
            sampler: trace.header.sampler.clone(),
            seed: trace.header.seed,
            samples: trace.records.len(),
            accept_rate: if rates.is_empty() { f64::NAN } else { diagnostics::mean(&rates) },
            functionals,
        })
    }

    pub fn get(&self, name: &str) -> Option<&FunctionalSummary> {
        self.functionals.iter().find(|f| f.name == name)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sampler={}", self.sampler);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "samples={}", self.samples);
        let _ = writeln!(s, "accept_rate_alloc={}", self.accept_rate);
        for f in &self.functionals {
            let _ = writeln!(s, "{}.mean={}", f.name, f.mean);
            let _ = writeln!(s, "{}.mcse={}", f.name, f.mcse);
            let _ = writeln!(s, "{}.tau={}", f.name, f.tau);
            let _ = writeln!(s, "{}.tau_se={}", f.name, f.tau_se);
            let _ = writeln!(s, "{}.window={}", f.name, f.window);
            if let Some(w) = &f.warning {
                let _ = writeln!(s, "{}.warning={}", f.name, w);
            }
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "sampler {}  seed {}  samples {}  allocation acceptance {:.4}",
            self.sampler, self.seed, self.samples, self.accept_rate
        );
        let _ = writeln!(
            s,
            "{:<10} {:>14} {:>12} {:>10} {:>10} {:>8}",
            "functional", "mean", "mcse", "tau", "s.e.", "window"
        );
        for f in &self.functionals {
            let _ = writeln!(
                s,
                "{:<10} {:>14.6} {:>12.6} {:>10.2} {:>10.2} {:>8}",
                f.name, f.mean, f.mcse, f.tau, f.tau_se, f.window
            );
        }
        for f in &self.functionals {
            if let Some(w) = &f.warning {
                let _ = writeln!(s, "warning: {}: {}", f.name, w);
            }
        }
        s
    }
}

/// Summary of one series. A constant series has no autocorrelation; it is
/// reported with `tau = NaN` and a warning.
pub fn summarize_series(name: String, values: &[f64]) -> Result<FunctionalSummary> {
    let mean = diagnostics::mean(values);
    if values.iter().all(|&v| v == values[0]) {
        return Ok(FunctionalSummary {
            name,
            mean,
            mcse: 0.0,
            tau: f64::NAN,
            tau_se: f64::NAN,
            window: 0,
            warning: Some("series is constant".into()),
        });
    }
    let est = diagnostics::iat(values, Window::Auto)?;
    let var = diagnostics::variance(values);
    let mcse = (var * est.tau.max(1.0) / values.len() as f64).sqrt();
    Ok(FunctionalSummary {
        name,
        mean,
        mcse,
        tau: est.tau,
        tau_se: est.std_err,
        window: est.window,
        warning: est.warning,
    })
}
