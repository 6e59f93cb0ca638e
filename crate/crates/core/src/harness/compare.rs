//! Side-by-side IAT tables for several run configurations.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::config::RunConfig;
use super::run::{run, RunOutput};
use super::trace::FunctionalSummary;

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub label: String,
    pub cells: Vec<FunctionalSummary>,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn cell(&self, row: usize, column: &str) -> Option<&FunctionalSummary> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.rows.get(row).map(|r| &r.cells[c])
    }

    /// `tau (s.e.)` per sampler and functional.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<24}", "sampler");
        for c in &self.columns {
            let _ = write!(s, " {:>18}", c);
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:<24}", r.label);
            for cell in &r.cells {
                let _ = write!(s, " {:>18}", format!("{:.2} ({:.2})", cell.tau, cell.tau_se));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(s, "row{i}.label={}", r.label);
            for cell in &r.cells {
                let _ = writeln!(s, "row{i}.{}.tau={}", cell.name, cell.tau);
                let _ = writeln!(s, "row{i}.{}.tau_se={}", cell.name, cell.tau_se);
            }
        }
        s
    }
}

/// Columns shared by every run: `M`, `D` and the monitored means common to
/// all configurations.
fn common_columns(configs: &[RunConfig]) -> Result<Vec<String>> {
    let mut shared = configs[0].monitored_indices();
    for c in &configs[1..] {
        let m = c.monitored_indices();
        shared.retain(|i| m.contains(i));
    }
    let any_monitored = configs.iter().any(|c| !c.monitored_indices().is_empty());
    if shared.is_empty() && any_monitored {
        return Err(Error::Config("the configurations share no monitored indices".into()));
    }
    Ok(["M".to_string(), "D".to_string()]
        .into_iter()
        .chain(shared.iter().map(|i| format!("zK_{i}")))
        .collect())
}

/// Runs every configuration (one thread each) and tabulates the IATs.
pub fn compare(configs: &[RunConfig]) -> Result<(ComparisonTable, Vec<RunOutput>)> {
    if configs.len() < 2 {
        return Err(Error::Config("compare needs at least two configurations".into()));
    }
    let columns = common_columns(configs)?;
    for c in configs {
        c.validate()?;
    }
    let outputs: Vec<Result<RunOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(configs.len());
    for (c, out) in configs.iter().zip(&outputs) {
        let cells = columns
            .iter()
            .map(|name| {
                out.summary
                    .get(name)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("run is missing functional {name}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ComparisonRow {
            label: format!("{} seed={}", c.sampler, c.seed),
            cells,
        });
    }
    Ok((ComparisonTable { columns, rows }, outputs))
}
