//! Lazily realized stick-breaking measure, retrospective prior sampling and
//! the Pólya urn.

use rand::Rng;
use rand_distr::{Beta, Distribution, Open01};

use crate::error::{Error, Result};
use crate::model::{ComponentParams, ModelSpec};

/// Sticks are kept strictly inside (0, 1) by this margin when drawn.
pub const STICK_CLAMP: f64 = 1e-15;

/// The realized prefix of the sequence `(V_j, Z_j)`.
///
/// `log_prefix[j]` holds `sum_{l<j} log(1 - V_l)`, so the weight of
/// component `j` is `exp(log_prefix[j]) * V_j` and the unrealized tail mass
/// is `exp(log_prefix[frontier])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickState {
    sticks: Vec<f64>,
    atoms: Vec<ComponentParams>,
    log_prefix: Vec<f64>,
}

impl Default for StickState {
    fn default() -> Self {
        Self::new()
    }
}

impl StickState {
    pub fn new() -> Self {
        Self {
            sticks: Vec::new(),
            atoms: Vec::new(),
            log_prefix: vec![0.0],
        }
    }

    /// Builds a state from explicit sticks and atoms (sticks may be exactly 1).
    pub fn from_parts(sticks: Vec<f64>, atoms: Vec<ComponentParams>) -> Result<Self> {
        if sticks.len() != atoms.len() {
            return Err(Error::InvalidParameter(format!(
                "{} sticks but {} atoms",
                sticks.len(),
                atoms.len()
            )));
        }
        if let Some(v) = sticks.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(Error::InvalidParameter(format!("stick {v} outside (0, 1]")));
        }
        let mut s = Self::new();
        s.sticks = sticks;
        s.atoms = atoms;
        s.recompute_from(0);
        Ok(s)
    }

    #[inline]
    pub fn frontier(&self) -> usize {
        self.sticks.len()
    }

    pub fn sticks(&self) -> &[f64] {
        &self.sticks
    }

    pub fn atoms(&self) -> &[ComponentParams] {
        &self.atoms
    }

    #[inline]
    pub fn stick(&self, j: usize) -> f64 {
        self.sticks[j]
    }

    #[inline]
    pub fn atom(&self, j: usize) -> &ComponentParams {
        &self.atoms[j]
    }

    pub fn atom_mut(&mut self, j: usize) -> &mut ComponentParams {
        &mut self.atoms[j]
    }

    /// `log prod_{l<=frontier} (1 - V_l)`.
    #[inline]
    pub fn log_tail_mass(&self) -> f64 {
        self.log_prefix[self.sticks.len()]
    }

    /// Mass not yet assigned to components `0..len`.
    #[inline]
    pub fn tail_mass(&self, len: usize) -> f64 {
        self.log_prefix[len].exp()
    }

    #[inline]
    pub fn log_remaining(&self, len: usize) -> f64 {
        self.log_prefix[len]
    }

    /// Weight `p_j`; `j` must be realized.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.log_prefix[j].exp() * self.sticks[j]
    }

    #[inline]
    pub fn log_weight(&self, j: usize) -> f64 {
        self.log_prefix[j] + self.sticks[j].ln()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.frontier()).map(|j| self.weight(j)).collect()
    }

    /// Pushes one pair onto the frontier.
    pub fn push(&mut self, stick: f64, atom: ComponentParams) {
        let last = *self.log_prefix.last().expect("non-empty prefix");
        self.sticks.push(stick);
        self.atoms.push(atom);
        self.log_prefix.push(last + (-stick).ln_1p());
    }

    /// Realizes prior pairs until `len` components exist.
    pub fn extend_to<R: Rng + ?Sized>(&mut self, len: usize, spec: &ModelSpec, rng: &mut R) {
        while self.frontier() < len {
            let v = draw_stick(1.0, spec.alpha, rng);
            let z = spec.sample_component(rng);
            self.push(v, z);
        }
    }

    /// Discards pairs at and beyond `len`.
    pub fn truncate(&mut self, len: usize) {
        self.sticks.truncate(len);
        self.atoms.truncate(len);
        self.log_prefix.truncate(len + 1);
    }

    pub fn set_stick(&mut self, j: usize, v: f64) {
        self.sticks[j] = v;
        self.recompute_from(j);
    }

    /// Overwrites sticks `0..values.len()` and refreshes the prefix sums once.
    pub fn set_sticks_prefix(&mut self, values: &[f64]) {
        self.sticks[..values.len()].copy_from_slice(values);
        self.recompute_from(0);
    }

    pub fn swap_atoms(&mut self, a: usize, b: usize) {
        self.atoms.swap(a, b);
    }

    /// Exchanges both the sticks and the atoms of `j` and `j + 1`.
    pub fn swap_neighbors(&mut self, j: usize) {
        self.sticks.swap(j, j + 1);
        self.atoms.swap(j, j + 1);
        self.recompute_from(j);
    }

    fn recompute_from(&mut self, j: usize) {
        self.log_prefix.truncate(j + 1);
        for l in j..self.sticks.len() {
            let prev = self.log_prefix[l];
            self.log_prefix.push(prev + (-self.sticks[l]).ln_1p());
        }
    }
}

/// `Beta(a, b)` draw kept inside `[STICK_CLAMP, 1 - STICK_CLAMP]`.
pub fn draw_stick<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let v = if a == 1.0 {
        // Beta(1, b) by inversion: 1 - U^{1/b}.
        let u: f64 = Open01.sample(rng);
        -(u.ln() / b).exp_m1()
    } else {
        Beta::new(a, b).expect("positive beta params").sample(rng)
    };
    v.clamp(STICK_CLAMP, 1.0 - STICK_CLAMP)
}

/// Checked weight lookup.
pub fn weights_from_sticks(state: &StickState, j: usize) -> Result<f64> {
    if j >= state.frontier() {
        return Err(Error::FrontierViolation {
            index: j,
            frontier: state.frontier(),
        });
    }
    Ok(state.weight(j))
}

/// A draw `(X_1..X_n)` from the DP prior with its allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSample {
    pub values: Vec<ComponentParams>,
    pub allocations: Vec<usize>,
}

/// Samples `(X_1..X_n)` from the DP prior.
///
/// Sticks are realized only as far as the inverse-CDF comparisons require.
/// The cumulative weight through component `j` is evaluated as
/// `1 - exp(log_prefix[j + 1])`, which stays monotone as it approaches one.
pub fn sample_prior_retrospective<R: Rng + ?Sized>(
    n: usize,
    spec: &ModelSpec,
    rng: &mut R,
) -> (PriorSample, StickState) {
    let mut state = StickState::new();
    state.extend_to(1, spec, rng);
    let mut allocations = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = Open01.sample(rng);
        // Find the first j with U <= 1 - tail(j + 1), i.e. tail(j + 1) <= 1 - U.
        let target = (-u).ln_1p();
        let mut j = 0;
        loop {
            if j == state.frontier() {
                state.extend_to(j + 1, spec, rng);
            }
            if state.log_remaining(j + 1) <= target {
                break;
            }
            j += 1;
        }
        allocations.push(j);
    }
    let values = allocations.iter().map(|&j| *state.atom(j)).collect();
    (PriorSample { values, allocations }, state)
}

/// Chinese-restaurant draw of a partition of `n` items.
///
/// Returns cluster labels in order of first appearance together with one
/// base-measure draw per cluster.
pub fn sample_polya_urn<R: Rng + ?Sized>(
    n: usize,
    spec: &ModelSpec,
    rng: &mut R,
) -> (Vec<usize>, Vec<ComponentParams>) {
    let mut labels = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    let mut params = Vec::new();
    for i in 0..n {
        let u = rng.random::<f64>() * (spec.alpha + i as f64);
        let mut acc = 0.0;
        let mut chosen = None;
        for (c, &s) in sizes.iter().enumerate() {
            acc += s as f64;
            if u < acc {
                chosen = Some(c);
                break;
            }
        }
        let c = match chosen {
            Some(c) => c,
            None => {
                sizes.push(0);
                params.push(spec.sample_component(rng));
                sizes.len() - 1
            }
        };
        sizes[c] += 1;
        labels.push(c);
    }
    (labels, params)
}
