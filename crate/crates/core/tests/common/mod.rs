//! Independent oracles shared by the integration tests and the acceptance run.
//!
//! Nothing here calls into the library's acceptance or normalizer code; the
//! oracles recompute everything from the raw sticks, atoms and data.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use retrodp::model::{BaseMeasureParams, ComponentParams, ModelSpec};
use retrodp::retro_conditional::{AllocationState, ChainState};
use retrodp::stick_breaking::StickState;

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn normal_pdf(y: f64, z: &ComponentParams) -> f64 {
    let d = y - z.mean;
    (-0.5 * d * d / z.variance).exp() / (2.0 * std::f64::consts::PI * z.variance).sqrt()
}

/// `p_j = V_j prod_{l<j} (1 - V_l)` by direct multiplication.
pub fn oracle_weights(sticks: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    sticks
        .iter()
        .map(|&v| {
            let p = v * rest;
            rest *= 1.0 - v;
            p
        })
        .collect()
}

/// Explicit frozen configuration for the oracle: labels, sticks, atoms, data.
#[derive(Debug, Clone)]
pub struct Frozen {
    pub labels: Vec<usize>,
    pub sticks: Vec<f64>,
    pub atoms: Vec<ComponentParams>,
    pub data: Vec<f64>,
    pub alpha: f64,
    pub base: BaseMeasureParams,
}

impl Frozen {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n = rng.random_range(2..=7);
        let alpha = rng.random_range(0.3..3.0);
        let spread = rng.random_range(1..=4);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..spread)).collect();
        let top = labels.iter().max().unwrap() + 1;
        let frontier = top + rng.random_range(1..=3);
        let sticks = (0..frontier).map(|_| rng.random_range(0.05..0.95)).collect();
        let atoms = (0..frontier)
            .map(|_| ComponentParams::new(rng.random_range(-2.0..2.0), rng.random_range(0.3..2.0)).unwrap())
            .collect();
        let normal = Normal::new(0.0, 1.5).unwrap();
        let data = (0..n).map(|_| normal.sample(rng)).collect();
        Self {
            labels,
            sticks,
            atoms,
            data,
            alpha,
            base: BaseMeasureParams::new(0.0, 2.0, 2.0, 1.0).unwrap(),
        }
    }

    pub fn max_k(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn to_state(&self) -> ChainState {
        ChainState::new(
            self.data.clone(),
            ModelSpec::new(self.base, self.alpha).unwrap(),
            AllocationState::new(self.labels.clone()),
            StickState::from_parts(self.sticks.clone(), self.atoms.clone()).unwrap(),
        )
        .unwrap()
    }

    /// Unnormalized log joint of `(K, V, Z, Y)` over the realized pairs:
    /// likelihood, allocation weights, Beta(1, alpha) sticks and the base
    /// measure up to constants.
    pub fn log_joint(&self) -> f64 {
        let p = oracle_weights(&self.sticks);
        let mut lj = 0.0;
        for (&k, &y) in self.labels.iter().zip(&self.data) {
            lj += p[k].ln() + normal_pdf(y, &self.atoms[k]).ln();
        }
        for &v in &self.sticks {
            lj += (self.alpha - 1.0) * (1.0 - v).ln();
        }
        for z in &self.atoms {
            let d = z.mean - self.base.mean0;
            lj += -0.5 * d * d / self.base.var_z;
            lj += -(self.base.gamma_shape + 1.0) * z.variance.ln() - self.base.beta_rate / z.variance;
        }
        lj
    }

    /// Proposal weight of component `j` for datum `i` in this configuration,
    /// and the proposal normalizer.
    fn proposal(&self, i: usize, j: usize) -> (f64, f64) {
        let p = oracle_weights(&self.sticks);
        let y = self.data[i];
        let max_k = self.max_k();
        let f: Vec<f64> = self.atoms.iter().map(|z| normal_pdf(y, z)).collect();
        let bound = f[..max_k].iter().copied().fold(0.0, f64::max);
        let head: f64 = (0..max_k).map(|l| p[l] * f[l]).sum();
        let tail = 1.0 - p[..max_k].iter().sum::<f64>();
        let weight = if j < max_k { p[j] * f[j] } else { bound * p[j] };
        (weight, head + bound * tail)
    }

    /// Metropolis-Hastings acceptance for moving datum `i` to `j`, from the
    /// joint density ratio times the reverse/forward proposal ratio.
    pub fn mh_acceptance(&self, i: usize, j: usize) -> f64 {
        let a = self.labels[i];
        if a == j {
            return 1.0;
        }
        let mut moved = self.clone();
        moved.labels[i] = j;
        let (fw, fc) = self.proposal(i, j);
        let (bw, bc) = moved.proposal(i, a);
        let log_r = moved.log_joint() - self.log_joint() + (bw / bc).ln() - (fw / fc).ln();
        log_r.exp().min(1.0)
    }

    fn relabel(&mut self, a: usize, b: usize) {
        for k in &mut self.labels {
            if *k == a {
                *k = b;
            } else if *k == b {
                *k = a;
            }
        }
    }

    /// Swap of two components' labels and atoms; symmetric proposal.
    pub fn random_swap_acceptance(&self, a: usize, b: usize) -> f64 {
        let mut s = self.clone();
        s.relabel(a, b);
        s.atoms.swap(a, b);
        (s.log_joint() - self.log_joint()).exp().min(1.0)
    }

    /// Swap of neighbours `j, j+1` with their sticks; `j` is proposed
    /// uniformly from `0..max_k`, so the proposal ratio is `max_k / max_k'`.
    pub fn neighbor_swap_acceptance(&self, j: usize) -> f64 {
        let mut s = self.clone();
        s.relabel(j, j + 1);
        s.atoms.swap(j, j + 1);
        s.sticks.swap(j, j + 1);
        let log_r = s.log_joint() - self.log_joint() + (self.max_k() as f64 / s.max_k() as f64).ln();
        log_r.exp().min(1.0)
    }

    pub fn alive(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.labels.clone();
        a.sort_unstable();
        a.dedup();
        a
    }
}

/// Sorted cluster sizes (descending) of a label vector.
pub fn size_multiset(labels: &[usize]) -> Vec<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut v: Vec<usize> = counts.into_values().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

pub fn total_variation<K: std::hash::Hash + Eq + Clone>(a: &HashMap<K, f64>, b: &HashMap<K, f64>) -> f64 {
    let mut keys: Vec<&K> = a.keys().collect();
    keys.extend(b.keys().filter(|k| !a.contains_key(*k)));
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

pub fn empirical<K: std::hash::Hash + Eq>(samples: impl IntoIterator<Item = K>) -> HashMap<K, f64> {
    let mut counts: HashMap<K, f64> = HashMap::new();
    let mut n = 0.0;
    for s in samples {
        *counts.entry(s).or_default() += 1.0;
        n += 1.0;
    }
    counts.values_mut().for_each(|c| *c /= n);
    counts
}

/// AR(1) series `x_t = phi x_{t-1} + e_t` started from stationarity.
pub fn ar1<R: Rng + ?Sized>(phi: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let e = Normal::new(0.0, 1.0).unwrap();
    let mut x = e.sample(rng) / (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            x = phi * x + e.sample(rng);
            x
        })
        .collect()
}

pub struct ExactCheck {
    pub tv: f64,
    pub monotone: bool,
    pub oracle_support: usize,
}

/// Draws `J` from the stream over one fixed stick realization and compares
/// with the law computed on a prefix whose leftover mass is below 1e-12.
pub fn exact_vs_truncation(seed: u64, draws: usize) -> ExactCheck {
    use retrodp::exact_allocation::BoundedWeightedStream;
    use retrodp::model::{likelihood_bound, VarianceMode};
    use retrodp::rng;

    let mut r = rng::stream(seed, 7);
    let variance = 0.5;
    let spec = ModelSpec::with_variance(BaseMeasureParams::new(0.0, 1.0, 2.0, 1.0).unwrap(), 1.0, VarianceMode::Fixed(variance)).unwrap();
    let mut sticks = StickState::new();
    let mut len = 1;
    sticks.extend_to(len, &spec, &mut r);
    while sticks.log_tail_mass().exp() >= 1e-12 {
        len += 1;
        sticks.extend_to(len, &spec, &mut r);
    }
    let y = 0.3;
    let p = oracle_weights(sticks.sticks());
    let f: Vec<f64> = sticks.atoms().iter().map(|z| normal_pdf(y, z)).collect();
    let total: f64 = p.iter().zip(&f).map(|(p, f)| p * f).sum();
    let oracle: HashMap<usize, f64> = (0..len).map(|j| (j, p[j] * f[j] / total)).collect();

    let bound = likelihood_bound(variance).unwrap();
    let mut stream =
        BoundedWeightedStream::new(&mut sticks, &spec, bound, |j, s: &StickState| normal_pdf(y, s.atom(j))).unwrap();
    let samples: Vec<usize> = (0..draws).map(|_| stream.sample(&mut r).unwrap()).collect();
    let mut monotone = true;
    let realized = stream.realized();
    let tol = 1e-14 * bound;
    for k in 0..realized {
        let (a, b) = (stream.bounds(k).unwrap(), stream.bounds(k + 1).unwrap());
        monotone &= a.c_lower <= b.c_lower + tol && b.c_upper <= a.c_upper + tol && a.c_lower <= a.c_upper + tol;
    }
    ExactCheck {
        tv: total_variation(&empirical(samples), &oracle),
        monotone,
        oracle_support: oracle.values().filter(|&&q| q > 1e-3).count(),
    }
}
