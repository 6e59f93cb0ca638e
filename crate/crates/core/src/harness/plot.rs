//! Gnuplot-ready kernel density figures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics;
use crate::error::Result;

/// Silverman's rule: `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let sd = diagnostics::variance(samples).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((p * (n - 1.0)).round() as usize).min(sorted.len() - 1)];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * n.powf(-0.2);
    if h > 0.0 && h.is_finite() {
        h
    } else {
        1e-3
    }
}

/// Gaussian kernel density estimate evaluated on `grid`.
pub fn kde(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let h = silverman_bandwidth(samples);
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| {
                    let u = (x - s) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
        })
        .collect()
}

pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Writes `fig_<stem>.dat` (grid column then one density column per series)
/// and `fig_<stem>.gp`, which plots them to `fig_<stem>.png`. Samples are
/// thinned to at most `max_samples` evenly spaced values to bound KDE cost.
pub fn write_density_figure(
    dir: &Path,
    stem: &str,
    title: &str,
    series: &[(String, Vec<f64>)],
    range: (f64, f64),
    max_samples: usize,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let grid = linear_grid(range.0, range.1, 201);
    let dens: Vec<Vec<f64>> = series
        .iter()
        .map(|(_, s)| {
            let step = s.len().div_ceil(max_samples.max(1)).max(1);
            let thinned: Vec<f64> = s.iter().step_by(step).copied().collect();
            kde(&thinned, &grid)
        })
        .collect();

    let mut dat = String::new();
    let _ = writeln!(
        dat,
        "# x {}",
        series.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" ")
    );
    for (g, x) in grid.iter().enumerate() {
        let _ = write!(dat, "{x}");
        for d in &dens {
            let _ = write!(dat, " {}", d[g]);
        }
        dat.push('\n');
    }
    let dat_name = format!("fig_{stem}.dat");
    let gp_name = format!("fig_{stem}.gp");

    let mut gp = String::new();
    let _ = writeln!(gp, "set terminal pngcairo size 800,500");
    let _ = writeln!(gp, "set output 'fig_{stem}.png'");
    let _ = writeln!(gp, "set title '{title}'");
    let _ = writeln!(gp, "set xrange [{}:{}]", range.0, range.1);
    let _ = writeln!(gp, "set ylabel 'density'");
    let plots: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(c, (name, _))| format!("'{dat_name}' using 1:{} with lines title '{name}'", c + 2))
        .collect();
    let _ = writeln!(gp, "plot {}", plots.join(", \\\n     "));

    let dat_path = dir.join(&dat_name);
    let gp_path = dir.join(&gp_name);
    fs::write(&dat_path, dat)?;
    fs::write(&gp_path, gp)?;
    Ok((gp_path, dat_path))
}
