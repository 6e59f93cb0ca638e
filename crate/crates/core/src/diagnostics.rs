//! Monitored functionals, integrated autocorrelation times and the Geweke
//! joint-distribution test.

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::ComponentParams;

/// `D = -2 sum_i log sum_j (m_j / n) f(y_i | z_j)` over the given clusters.
///
/// Evaluated in log space, so data far in the tails give a large finite value.
pub fn deviance(clusters: &[(usize, ComponentParams)], data: &[f64]) -> f64 {
    let n: usize = clusters.iter().map(|(m, _)| m).sum();
    if n == 0 {
        return 0.0;
    }
    let log_w: Vec<f64> = clusters.iter().map(|(m, _)| (*m as f64 / n as f64).ln()).collect();
    let mut total = 0.0;
    let mut terms = Vec::with_capacity(clusters.len());
    for &y in data {
        terms.clear();
        terms.extend(clusters.iter().zip(&log_w).map(|((_, z), lw)| lw + z.log_density(y)));
        total += log_sum_exp(&terms);
    }
    -2.0 * total
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn num_clusters(counts: &[usize]) -> usize {
    counts.iter().filter(|&&m| m > 0).count()
}

/// A named monitored chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// Biased sample autocorrelation at `lag`.
pub fn autocorrelation(values: &[f64], lag: usize) -> Result<f64> {
    if lag >= values.len() {
        return Err(Error::InvalidParameter(format!(
            "lag {lag} not below series length {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let c0 = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if !(c0 > 0.0) {
        return Err(Error::UndefinedAutocorrelation);
    }
    let ck = values
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / n;
    Ok(ck / c0)
}

/// Autocorrelations at lags `0..=max_lag` via FFT.
pub fn autocorrelations(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidParameter("series needs at least two values".into()));
    }
    let max_lag = max_lag.min(n - 1);
    let mean = values.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    if !(c0 > 1e-300 * n as f64) {
        return Err(Error::UndefinedAutocorrelation);
    }
    Ok(buf[..=max_lag].iter().map(|c| c.re / c0).collect())
}

/// Summation window for the IAT estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Fixed(usize),
    /// Smallest `L` with `L >= AUTO_WINDOW_C * tau(L)`.
    Auto,
}

pub const AUTO_WINDOW_C: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct IatEstimate {
    pub tau: f64,
    pub std_err: f64,
    pub window: usize,
    pub n_samples: usize,
    /// Set when the self-consistent window was not found below `N / 10`.
    pub warning: Option<String>,
}

/// `tau = 1 + 2 sum_{j=1}^{L} rho_j` with the windowed standard error
/// `tau * sqrt(2 (2L + 1) / N)` (Sokal's large-sample variance of the
/// truncated estimator).
pub fn iat(values: &[f64], window: Window) -> Result<IatEstimate> {
    let n = values.len();
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "IAT estimation needs at least 100 samples, got {n}"
        )));
    }
    let limit = (n / 10).max(1);
    let (rho, window, warning) = match window {
        Window::Fixed(l) => {
            if l >= n {
                return Err(Error::InvalidParameter(format!("window {l} not below N = {n}")));
            }
            (autocorrelations(values, l)?, l, None)
        }
        Window::Auto => {
            let rho = autocorrelations(values, limit)?;
            let mut tau = 1.0;
            let mut found = None;
            for (l, r) in rho.iter().enumerate().skip(1) {
                tau += 2.0 * r;
                if l as f64 >= AUTO_WINDOW_C * tau {
                    found = Some(l);
                    break;
                }
            }
            match found {
                Some(l) => (rho, l, None),
                None => (
                    rho,
                    limit,
                    Some(format!("self-consistent window not reached below N/10 = {limit}")),
                ),
            }
        }
    };
    let tau = 1.0 + 2.0 * rho[1..=window].iter().sum::<f64>();
    let std_err = tau.abs() * (2.0 * (2.0 * window as f64 + 1.0) / n as f64).sqrt();
    Ok(IatEstimate {
        tau,
        std_err,
        window,
        n_samples: n,
        warning,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Posterior mean with its Monte Carlo standard error `sd * sqrt(tau / N)`.
pub fn mean_with_mcse(values: &[f64]) -> Result<(f64, f64)> {
    let m = mean(values);
    let var = variance(values);
    if var == 0.0 {
        return Ok((m, 0.0));
    }
    let tau = iat(values, Window::Auto)?.tau.max(1.0);
    Ok((m, (var * tau / values.len() as f64).sqrt()))
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`, tie-aware.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail probability `Q(lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS p-value with effective sample sizes `n_a`, `n_b`.
pub fn ks_p_value(d: f64, n_a: f64, n_b: f64) -> f64 {
    let ne = n_a * n_b / (n_a + n_b);
    let sq = ne.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

/// A sampler under test in the Geweke joint-distribution harness.
///
/// `Params` is everything the kernel updates; `Data` is regenerated from it.
pub trait GewekeModel {
    type Params: Clone;
    type Data: Clone;

    /// Independent draw of `(params, data)` from prior then likelihood.
    fn sample_joint<R: Rng + ?Sized>(&self, rng: &mut R) -> (Self::Params, Self::Data);
    /// One sampler transition targeting `params | data`.
    fn transition<R: Rng + ?Sized>(&self, params: &mut Self::Params, data: &Self::Data, rng: &mut R) -> Result<()>;
    /// `data ~ f(. | params)`.
    fn regenerate<R: Rng + ?Sized>(&self, params: &Self::Params, rng: &mut R) -> Self::Data;
    fn statistic_names(&self) -> Vec<String>;
    fn statistics(&self, params: &Self::Params, data: &Self::Data) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeStat {
    pub name: String,
    pub ks: f64,
    pub p_value: f64,
    pub marginal_mean: f64,
    pub successive_mean: f64,
    /// Effective size of the successive-conditional sample.
    pub effective_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeReport {
    pub stats: Vec<GewekeStat>,
}

impl GewekeReport {
    pub fn min_p(&self) -> f64 {
        self.stats.iter().map(|s| s.p_value).fold(1.0, f64::min)
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.stats.iter().find(|s| s.name == name).map(|s| s.p_value)
    }
}

/// Compares marginal-conditional draws with a successive-conditional chain
/// (alternating one transition with data regeneration).
///
/// The successive sample is autocorrelated, so each KS p-value uses its
/// effective size `N / tau`, with `tau` from the windowed IAT estimator.
pub fn geweke_test<M: GewekeModel, R: Rng + ?Sized>(
    model: &M,
    iterations: usize,
    rng_marginal: &mut R,
    rng_chain: &mut R,
) -> Result<GewekeReport> {
    let names = model.statistic_names();
    let k = names.len();
    let mut marginal = vec![Vec::with_capacity(iterations); k];
    for _ in 0..iterations {
        let (p, d) = model.sample_joint(rng_marginal);
        for (col, v) in marginal.iter_mut().zip(model.statistics(&p, &d)) {
            col.push(v);
        }
    }
    let mut successive = vec![Vec::with_capacity(iterations); k];
    let (mut params, mut data) = model.sample_joint(rng_chain);
    for _ in 0..iterations {
        model.transition(&mut params, &data, rng_chain)?;
        data = model.regenerate(&params, rng_chain);
        for (col, v) in successive.iter_mut().zip(model.statistics(&params, &data)) {
            col.push(v);
        }
    }
    let stats = names
        .into_iter()
        .zip(marginal.iter().zip(&successive))
        .map(|(name, (m, s))| {
            let tau = iat(s, Window::Auto).map(|e| e.tau.max(1.0)).unwrap_or(1.0);
            let effective_n = s.len() as f64 / tau;
            let ks = ks_statistic(m, s);
            GewekeStat {
                name,
                ks,
                p_value: ks_p_value(ks, m.len() as f64, effective_n),
                marginal_mean: mean(m),
                successive_mean: mean(s),
                effective_n,
            }
        })
        .collect();
    Ok(GewekeReport { stats })
}
