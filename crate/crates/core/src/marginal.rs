//! Marginal baseline: Neal's auxiliary-parameter Gibbs sampler (Algorithm 8)
//! for non-conjugate DP mixtures.
//!
//! Cluster ids are arbitrary; empty clusters are removed immediately so ids
//! stay dense in `0..num_clusters`.

use rand::Rng;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::model::{ComponentParams, ModelSpec};

pub const DEFAULT_AUX: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    labels: Vec<usize>,
    params: Vec<ComponentParams>,
    sizes: Vec<usize>,
}

impl ClusterState {
    pub fn new(labels: Vec<usize>, params: Vec<ComponentParams>) -> Result<Self> {
        let mut sizes = vec![0; params.len()];
        for &c in &labels {
            if c >= params.len() {
                return Err(Error::InvalidParameter(format!("label {c} has no parameters")));
            }
            sizes[c] += 1;
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("every cluster needs at least one member".into()));
        }
        Ok(Self { labels, params, sizes })
    }

    /// Everything in one cluster with parameters from the base measure.
    pub fn single_cluster<R: Rng + ?Sized>(n: usize, spec: &ModelSpec, rng: &mut R) -> Self {
        Self {
            labels: vec![0; n],
            params: vec![spec.sample_component(rng)],
            sizes: vec![n],
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn params(&self) -> &[ComponentParams] {
        &self.params
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_clusters(&self) -> usize {
        self.params.len()
    }

    /// Parameters of the cluster holding datum `i`.
    pub fn param_of(&self, i: usize) -> &ComponentParams {
        &self.params[self.labels[i]]
    }

    /// Applies a permutation of cluster ids: old id `c` becomes `perm[c]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut params = self.params.clone();
        let mut sizes = self.sizes.clone();
        for (c, &to) in perm.iter().enumerate() {
            params[to] = self.params[c];
            sizes[to] = self.sizes[c];
        }
        Self {
            labels: self.labels.iter().map(|&c| perm[c]).collect(),
            params,
            sizes,
        }
    }

    fn remove_cluster(&mut self, c: usize) {
        let last = self.params.len() - 1;
        self.params.swap_remove(c);
        self.sizes.swap_remove(c);
        if c != last {
            for l in &mut self.labels {
                if *l == last {
                    *l = c;
                }
            }
        }
    }

    pub fn is_consistent(&self) -> bool {
        let mut sizes = vec![0; self.params.len()];
        for &c in &self.labels {
            if c >= sizes.len() {
                return false;
            }
            sizes[c] += 1;
        }
        sizes == self.sizes && sizes.iter().all(|&s| s > 0)
    }
}

/// One sweep: reassign every datum with `m_aux` auxiliary parameters, then
/// Gibbs-update every cluster's parameters.
pub fn neal8_sweep<R: Rng + ?Sized>(
    cs: &mut ClusterState,
    data: &[f64],
    spec: &ModelSpec,
    m_aux: usize,
    rng: &mut R,
) -> Result<()> {
    if m_aux == 0 {
        return Err(Error::InvalidParameter("Algorithm 8 needs at least one auxiliary state".into()));
    }
    let log_aux_weight = (spec.alpha / m_aux as f64).ln();
    let mut aux = Vec::with_capacity(m_aux);
    let mut logw = Vec::new();
    for (i, &y) in data.iter().enumerate() {
        let c = cs.labels[i];
        cs.sizes[c] -= 1;
        aux.clear();
        if cs.sizes[c] == 0 {
            // The orphaned parameter becomes the first auxiliary.
            aux.push(cs.params[c]);
            cs.remove_cluster(c);
        }
        while aux.len() < m_aux {
            aux.push(spec.sample_component(rng));
        }

        logw.clear();
        for (s, z) in cs.sizes.iter().zip(&cs.params) {
            logw.push((*s as f64).ln() + z.log_density(y));
        }
        for z in &aux {
            logw.push(log_aux_weight + z.log_density(y));
        }
        let pick = sample_log_weights(&logw, rng);
        if pick < cs.params.len() {
            cs.labels[i] = pick;
            cs.sizes[pick] += 1;
        } else {
            cs.params.push(aux[pick - cs.sizes.len()]);
            cs.sizes.push(1);
            cs.labels[i] = cs.params.len() - 1;
        }
    }
    let mut groups = vec![Vec::new(); cs.params.len()];
    for (&c, &y) in cs.labels.iter().zip(data) {
        groups[c].push(y);
    }
    for (z, ys) in cs.params.iter_mut().zip(&groups) {
        *z = spec.update_component(*z, ys, rng)?;
    }
    Ok(())
}

/// Index drawn with probability proportional to `exp(logw)`.
pub fn sample_log_weights<R: Rng + ?Sized>(logw: &[f64], rng: &mut R) -> usize {
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logw.iter().map(|l| (l - m).exp()).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (k, l) in logw.iter().enumerate() {
        acc += (l - m).exp();
        if u < acc {
            return k;
        }
    }
    logw.len() - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitoredStats {
    pub clusters: usize,
    pub deviance: f64,
    /// Component mean of the cluster holding each monitored datum.
    pub monitored_means: Vec<f64>,
}

pub fn monitored_stats(cs: &ClusterState, data: &[f64], monitored: &[usize]) -> MonitoredStats {
    let clusters: Vec<(usize, ComponentParams)> =
        cs.sizes.iter().copied().zip(cs.params.iter().copied()).collect();
    MonitoredStats {
        clusters: diagnostics::num_clusters(&cs.sizes),
        deviance: diagnostics::deviance(&clusters, data),
        monitored_means: monitored.iter().map(|&i| cs.param_of(i).mean).collect(),
    }
}
