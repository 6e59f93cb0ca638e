//! Retrospective conditional MCMC over `(K, V, Z)`.
//!
//! Each sweep runs Gibbs updates of the atoms and sticks, a retrospective
//! Metropolis-Hastings pass over the allocations, the two label-switching
//! moves and, optionally, a concentration update. Sticks and atoms beyond
//! `max_k` are prior draws given the allocations, so they are realized only
//! when a proposal walks into the tail and are discarded at the end of a pass.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::exact_allocation;
use crate::model::{ComponentParams, ModelSpec};
use crate::stick_breaking::{draw_stick, StickState};

/// Allocations `k_i` with occupancy counts.
///
/// `counts` is kept exactly `max_k` long: the last entry is always positive
/// unless there is no data at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationState {
    k: Vec<usize>,
    counts: Vec<usize>,
}

impl AllocationState {
    pub fn new(k: Vec<usize>) -> Self {
        let mut counts = Vec::new();
        for &j in &k {
            if j >= counts.len() {
                counts.resize(j + 1, 0);
            }
            counts[j] += 1;
        }
        Self { k, counts }
    }

    pub fn single_cluster(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    pub fn labels(&self) -> &[usize] {
        &self.k
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.k[i]
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// Length of the occupied prefix (the largest one-based label).
    #[inline]
    pub fn max_k(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn count(&self, j: usize) -> usize {
        self.counts.get(j).copied().unwrap_or(0)
    }

    /// Occupancy of components `0..max_k`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().enumerate().filter(|(_, &m)| m > 0).map(|(j, _)| j)
    }

    pub fn num_alive(&self) -> usize {
        diagnostics::num_clusters(&self.counts)
    }

    /// `max_k` after moving datum `i` to `j`, without applying the move.
    pub fn max_after_move(&self, i: usize, j: usize) -> usize {
        let from = self.k[i];
        if j + 1 >= self.max_k() {
            return j + 1;
        }
        // j sits below the top; only a singleton top leaving can lower max_k.
        if from + 1 == self.max_k() && self.counts[from] == 1 {
            let below = self.counts[..from]
                .iter()
                .rposition(|&m| m > 0)
                .map_or(0, |p| p + 1);
            below.max(j + 1)
        } else {
            self.max_k()
        }
    }

    pub fn reassign(&mut self, i: usize, j: usize) {
        let from = self.k[i];
        if from == j {
            return;
        }
        self.counts[from] -= 1;
        if j >= self.counts.len() {
            self.counts.resize(j + 1, 0);
        }
        self.counts[j] += 1;
        self.k[i] = j;
        self.trim_counts();
    }

    /// Relabels every allocation `a <-> b`.
    pub fn swap_labels(&mut self, a: usize, b: usize) {
        let hi = a.max(b);
        if hi >= self.counts.len() {
            self.counts.resize(hi + 1, 0);
        }
        self.counts.swap(a, b);
        for kj in &mut self.k {
            if *kj == a {
                *kj = b;
            } else if *kj == b {
                *kj = a;
            }
        }
        self.trim_counts();
    }

    fn trim_counts(&mut self) {
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    /// Recounts from scratch and compares with the cached counts.
    pub fn is_consistent(&self) -> bool {
        *self == Self::new(self.k.clone())
    }
}

/// Full sampler state: allocations, realized sticks/atoms, model and data.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub alloc: AllocationState,
    pub sticks: StickState,
    pub spec: ModelSpec,
    pub data: Vec<f64>,
}

impl ChainState {
    pub fn new(data: Vec<f64>, spec: ModelSpec, alloc: AllocationState, sticks: StickState) -> Result<Self> {
        if alloc.n() != data.len() {
            return Err(Error::InvalidParameter(format!(
                "{} allocations for {} data points",
                alloc.n(),
                data.len()
            )));
        }
        if sticks.frontier() < alloc.max_k() {
            return Err(Error::FrontierViolation {
                index: alloc.max_k() - 1,
                frontier: sticks.frontier(),
            });
        }
        Ok(Self {
            alloc,
            sticks,
            spec,
            data,
        })
    }

    /// All data in the first component, whose stick and atom come from the prior.
    pub fn initial<R: Rng + ?Sized>(data: Vec<f64>, spec: ModelSpec, rng: &mut R) -> Self {
        let alloc = AllocationState::single_cluster(data.len());
        let mut sticks = StickState::new();
        sticks.extend_to(alloc.max_k(), &spec, rng);
        Self {
            alloc,
            sticks,
            spec,
            data,
        }
    }

    /// Data grouped by component for components `0..len`.
    pub fn members(&self, len: usize) -> Vec<Vec<f64>> {
        let mut groups = vec![Vec::new(); len];
        for (&k, &y) in self.alloc.labels().iter().zip(&self.data) {
            if k < len {
                groups[k].push(y);
            }
        }
        groups
    }

    /// Discards realized pairs beyond `max_k`.
    pub fn trim(&mut self) {
        let m = self.alloc.max_k();
        self.sticks.truncate(m);
    }

    pub fn deviance(&self) -> f64 {
        let clusters: Vec<(usize, ComponentParams)> = self
            .alloc
            .alive()
            .map(|j| (self.alloc.count(j), *self.sticks.atom(j)))
            .collect();
        diagnostics::deviance(&clusters, &self.data)
    }
}

/// Atoms: alive components from their full conditional, dead ones from the
/// base measure.
pub fn gibbs_update_z<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Result<()> {
    let len = state.sticks.frontier();
    let groups = state.members(len);
    for (j, ys) in groups.iter().enumerate() {
        let z = if ys.is_empty() {
            state.spec.sample_component(rng)
        } else {
            state.spec.update_component(*state.sticks.atom(j), ys, rng)?
        };
        *state.sticks.atom_mut(j) = z;
    }
    Ok(())
}

/// Sticks: `V_j ~ Beta(m_j + 1, n - sum_{l<=j} m_l + alpha)` independently.
pub fn gibbs_update_v<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) {
    let n = state.alloc.n();
    let mut cum = 0usize;
    let values: Vec<f64> = (0..state.sticks.frontier())
        .map(|j| {
            let m = state.alloc.count(j);
            cum += m;
            draw_stick(m as f64 + 1.0, (n - cum) as f64 + state.spec.alpha, rng)
        })
        .collect();
    state.sticks.set_sticks_prefix(&values);
}

/// Redraws the atoms of dead components below `max_k` from the base measure.
pub fn refresh_dead_atoms<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) {
    for j in 0..state.alloc.max_k() {
        if state.alloc.count(j) == 0 {
            *state.sticks.atom_mut(j) = state.spec.sample_component(rng);
        }
    }
}

/// `M_i(k) = max_{j < max_k} f(Y_i | Z_j)`.
pub fn proposal_bound(state: &ChainState, i: usize) -> f64 {
    let y = state.data[i];
    (0..state.alloc.max_k())
        .map(|j| state.sticks.atom(j).log_density(y))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}

/// Normalizer `c~_i(k)` of the allocation proposal.
pub fn proposal_normalizer(state: &ChainState, i: usize) -> f64 {
    let terms = DatumTerms::build(state, i, state.alloc.max_k());
    let (c, _) = terms.normalizer(&state.sticks, state.alloc.max_k());
    c * terms.shift.exp()
}

/// Which branch of the acceptance probability applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptCase {
    /// Proposal within the occupied prefix and `max_k` unchanged.
    Within,
    /// Proposal within the prefix, but the datum was the only member of the top component.
    MaxDrops,
    /// Proposal beyond `max_k`.
    Tail,
}

/// Deliberate kernel corruptions used to check that the correctness tests
/// have power. Never enable outside tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMutation {
    #[default]
    None,
    /// Inverts the Metropolis-Hastings ratio in the two non-trivial cases.
    InvertedRatio,
}

/// Per-datum log densities, shifted so the current bound `M_i(k)` is 1.
///
/// Every quantity in the acceptance probability is homogeneous of degree zero
/// in a common rescaling of the densities, so working with `f_j / M_i(k)`
/// avoids underflow without changing any ratio.
struct DatumTerms {
    y: f64,
    shift: f64,
    rel: Vec<f64>,
}

impl DatumTerms {
    fn build(state: &ChainState, i: usize, len: usize) -> Self {
        let y = state.data[i];
        let logs: Vec<f64> = (0..len).map(|j| state.sticks.atom(j).log_density(y)).collect();
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let rel = logs.iter().map(|l| (l - shift).exp()).collect();
        Self { y, shift, rel }
    }

    fn extend(&mut self, sticks: &StickState, len: usize) {
        while self.rel.len() < len {
            let j = self.rel.len();
            self.rel.push((sticks.atom(j).log_density(self.y) - self.shift).exp());
        }
    }

    /// `(c~, M~)` for an occupied prefix of length `len`.
    fn normalizer(&self, sticks: &StickState, len: usize) -> (f64, f64) {
        let mut sum = 0.0;
        let mut bound = 0.0f64;
        for j in 0..len {
            sum += sticks.weight(j) * self.rel[j];
            bound = bound.max(self.rel[j]);
        }
        (sum + bound * sticks.tail_mass(len), bound)
    }
}

fn acceptance_from_terms(
    terms: &DatumTerms,
    sticks: &StickState,
    alloc: &AllocationState,
    i: usize,
    j: usize,
    mutation: KernelMutation,
) -> (f64, AcceptCase) {
    let max_before = alloc.max_k();
    let max_after = alloc.max_after_move(i, j);
    if j < max_before && max_after == max_before {
        return (1.0, AcceptCase::Within);
    }
    let (c_before, m_before) = terms.normalizer(sticks, max_before);
    let (c_after, m_after) = terms.normalizer(sticks, max_after);
    let (ratio, case) = if j < max_before {
        let f_cur = terms.rel[alloc.label(i)];
        (c_before * m_after / (c_after * f_cur), AcceptCase::MaxDrops)
    } else {
        (c_before * terms.rel[j] / (c_after * m_before), AcceptCase::Tail)
    };
    let ratio = match mutation {
        KernelMutation::None => ratio,
        KernelMutation::InvertedRatio => ratio.recip(),
    };
    (ratio.min(1.0), case)
}

/// Acceptance probability of moving datum `i` to component `j`.
///
/// `j` must be realized. This evaluates the same routine the sampler uses.
pub fn accept_probability(state: &ChainState, i: usize, j: usize) -> Result<(f64, AcceptCase)> {
    if j >= state.sticks.frontier() {
        return Err(Error::FrontierViolation {
            index: j,
            frontier: state.sticks.frontier(),
        });
    }
    let len = state.alloc.max_k().max(j + 1);
    let terms = DatumTerms::build_with_shift(state, i, len);
    Ok(acceptance_from_terms(
        &terms,
        &state.sticks,
        &state.alloc,
        i,
        j,
        KernelMutation::None,
    ))
}

impl DatumTerms {
    /// Like `build` but the shift only looks at the occupied prefix.
    fn build_with_shift(state: &ChainState, i: usize, len: usize) -> Self {
        let mut t = Self::build(state, i, state.alloc.max_k());
        t.extend(&state.sticks, len);
        t
    }
}

/// Draws a proposed component for datum `i`, realizing tail pairs from the
/// prior as needed.
pub fn propose_allocation<R: Rng + ?Sized>(state: &mut ChainState, i: usize, rng: &mut R) -> usize {
    let mut terms = DatumTerms::build(state, i, state.alloc.max_k());
    propose_with_terms(state, &mut terms, rng)
}

fn propose_with_terms<R: Rng + ?Sized>(state: &mut ChainState, terms: &mut DatumTerms, rng: &mut R) -> usize {
    let max_k = state.alloc.max_k();
    let (c, bound) = terms.normalizer(&state.sticks, max_k);
    let u: f64 = Open01.sample(rng);
    let target = u * c;
    let mut cum = 0.0;
    for j in 0..max_k {
        cum += state.sticks.weight(j) * terms.rel[j];
        if target <= cum {
            return j;
        }
    }
    // Inside the tail the proposal is the prior stick law: the cumulative
    // tail mass through j is bound * (tail(max_k) - tail(j + 1)).
    let tail = state.sticks.tail_mass(max_k);
    let threshold = (tail - (target - cum) / bound).max(tail * 1e-16);
    let mut j = max_k;
    loop {
        if j >= state.sticks.frontier() {
            let spec = state.spec;
            state.sticks.extend_to(j + 1, &spec, rng);
        }
        if state.sticks.tail_mass(j + 1) <= threshold {
            terms.extend(&state.sticks, j + 1);
            return j;
        }
        j += 1;
    }
}

/// Counters accumulated during one sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub proposals: usize,
    pub accepted: usize,
    pub tail_proposals: usize,
    /// Sum over proposals of the prior tail mass beyond `max_k`.
    pub tail_mass_sum: f64,
    pub max_frontier: usize,
    pub swap_random_tries: usize,
    pub swap_random_accepts: usize,
    pub swap_neighbor_tries: usize,
    pub swap_neighbor_accepts: usize,
}

impl SweepStats {
    pub fn accept_rate(&self) -> f64 {
        if self.proposals == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// How the allocation variables are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AllocationKernel {
    /// Retrospective Metropolis-Hastings.
    #[default]
    Metropolis,
    /// Exact retrospective Gibbs; requires a bounded likelihood.
    Exact,
}

/// Gamma prior on the concentration (shape, rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub update_z: bool,
    pub update_v: bool,
    pub update_allocations: bool,
    pub allocation_kernel: AllocationKernel,
    /// Refresh dead atoms and trim the frontier before every allocation update.
    pub accelerations: bool,
    pub random_scan: bool,
    pub label_swap: bool,
    /// Repetitions of each swap move; `None` means one per alive component.
    pub n_swap: Option<usize>,
    pub alpha_prior: Option<GammaPrior>,
    #[doc(hidden)]
    pub mutation: KernelMutation,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            update_z: true,
            update_v: true,
            update_allocations: true,
            allocation_kernel: AllocationKernel::Metropolis,
            accelerations: true,
            random_scan: true,
            label_swap: true,
            n_swap: None,
            alpha_prior: None,
            mutation: KernelMutation::None,
        }
    }
}

impl SweepConfig {
    /// Every move switched off.
    pub fn frozen() -> Self {
        Self {
            update_z: false,
            update_v: false,
            update_allocations: false,
            label_swap: false,
            alpha_prior: None,
            ..Self::default()
        }
    }
}

/// One pass of Metropolis-Hastings updates over all allocations.
pub fn update_allocations<R: Rng + ?Sized>(
    state: &mut ChainState,
    cfg: &SweepConfig,
    stats: &mut SweepStats,
    rng: &mut R,
) {
    let mut order: Vec<usize> = (0..state.alloc.n()).collect();
    if cfg.random_scan {
        order.shuffle(rng);
    }
    for i in order {
        if cfg.accelerations {
            refresh_dead_atoms(state, rng);
            state.trim();
        }
        let max_k = state.alloc.max_k();
        let mut terms = DatumTerms::build(state, i, max_k);
        stats.tail_mass_sum += state.sticks.tail_mass(max_k);
        let j = propose_with_terms(state, &mut terms, rng);
        stats.proposals += 1;
        stats.max_frontier = stats.max_frontier.max(state.sticks.frontier());
        if j >= max_k {
            stats.tail_proposals += 1;
        }
        let (a, case) = acceptance_from_terms(&terms, &state.sticks, &state.alloc, i, j, cfg.mutation);
        debug_assert!(case != AcceptCase::Within || a == 1.0);
        if a >= 1.0 || rng.random::<f64>() < a {
            stats.accepted += 1;
            state.alloc.reassign(i, j);
        }
    }
    state.trim();
}

/// Acceptance probability for exchanging the labels of components `a` and `b`
/// (atoms and allocations move, sticks stay).
pub fn random_swap_acceptance(state: &ChainState, a: usize, b: usize) -> f64 {
    let (ma, mb) = (state.alloc.count(a) as f64, state.alloc.count(b) as f64);
    let log_ratio = (mb - ma) * (state.sticks.log_weight(a) - state.sticks.log_weight(b));
    log_ratio.exp().min(1.0)
}

/// Exchanges the labels of two distinct alive components chosen uniformly.
/// Returns `None` when fewer than two components are alive.
pub fn label_swap_random<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Option<bool> {
    let alive: Vec<usize> = state.alloc.alive().collect();
    if alive.len() < 2 {
        return None;
    }
    let x = rng.random_range(0..alive.len());
    let mut y = rng.random_range(0..alive.len() - 1);
    if y >= x {
        y += 1;
    }
    let (a, b) = (alive[x], alive[y]);
    let acc = random_swap_acceptance(state, a, b);
    let accept = acc >= 1.0 || rng.random::<f64>() < acc;
    if accept {
        state.sticks.swap_atoms(a, b);
        state.alloc.swap_labels(a, b);
    }
    Some(accept)
}

/// Acceptance probability for exchanging components `j` and `j + 1` together
/// with their sticks. Both must be realized.
///
/// The pair index is drawn uniformly from `0..max_k`, so a move that changes
/// `max_k` carries the proposal ratio `max_k / max_k'`.
pub fn neighbor_swap_acceptance(state: &ChainState, j: usize) -> f64 {
    let (mj, mj1) = (state.alloc.count(j) as f64, state.alloc.count(j + 1) as f64);
    let (vj, vj1) = (state.sticks.stick(j), state.sticks.stick(j + 1));
    let log_ratio = mj * (-vj1).ln_1p() - mj1 * (-vj).ln_1p();
    let before = state.alloc.max_k();
    let after = neighbor_max_after(&state.alloc, j);
    (log_ratio.exp() * before as f64 / after as f64).min(1.0)
}

fn neighbor_max_after(alloc: &AllocationState, j: usize) -> usize {
    let max_k = alloc.max_k();
    if j + 1 == max_k {
        // the top component moves up
        max_k + 1
    } else if j + 2 == max_k && alloc.count(j) == 0 {
        // the top component moves down into an empty slot
        max_k - 1
    } else {
        max_k
    }
}

pub fn label_swap_neighbor<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Option<bool> {
    let max_k = state.alloc.max_k();
    if max_k == 0 {
        return None;
    }
    let j = rng.random_range(0..max_k);
    if j + 2 > state.sticks.frontier() {
        let spec = state.spec;
        state.sticks.extend_to(j + 2, &spec, rng);
    }
    let acc = neighbor_swap_acceptance(state, j);
    let accept = acc >= 1.0 || rng.random::<f64>() < acc;
    if accept {
        state.sticks.swap_neighbors(j);
        state.alloc.swap_labels(j, j + 1);
    }
    state.trim();
    Some(accept)
}

/// Concentration update given the sticks of the occupied prefix:
/// `alpha ~ Gamma(shape + max_k, rate - sum_{j<max_k} log(1 - V_j))`.
pub fn update_alpha<R: Rng + ?Sized>(state: &mut ChainState, prior: GammaPrior, rng: &mut R) {
    let (shape, rate) = alpha_posterior(state, prior);
    let a = Gamma::new(shape, 1.0 / rate).expect("positive gamma params").sample(rng);
    state.spec.alpha = a.max(f64::MIN_POSITIVE);
}

/// Shape and rate of the concentration's full conditional.
pub fn alpha_posterior(state: &ChainState, prior: GammaPrior) -> (f64, f64) {
    let len = state.alloc.max_k().min(state.sticks.frontier());
    (
        prior.shape + len as f64,
        prior.rate - state.sticks.log_remaining(len),
    )
}

/// Summary of the state after a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alive: usize,
    pub deviance: f64,
    pub frontier: usize,
    pub alpha: f64,
    pub stats: SweepStats,
}

/// One full cycle of the sampler.
pub fn sweep<R: Rng + ?Sized>(state: &mut ChainState, cfg: &SweepConfig, rng: &mut R) -> Result<SweepRecord> {
    let mut stats = SweepStats::default();
    if cfg.update_z {
        gibbs_update_z(state, rng)?;
    }
    if cfg.update_v {
        gibbs_update_v(state, rng);
    }
    if cfg.update_allocations {
        match cfg.allocation_kernel {
            AllocationKernel::Metropolis => update_allocations(state, cfg, &mut stats, rng),
            AllocationKernel::Exact => {
                exact_allocation::gibbs_update_allocations_exact(state, rng)?;
                stats.proposals += state.alloc.n();
                stats.accepted += state.alloc.n();
            }
        }
    }
    if cfg.label_swap {
        let reps = cfg.n_swap.unwrap_or_else(|| state.alloc.num_alive().max(1));
        for _ in 0..reps {
            if let Some(acc) = label_swap_random(state, rng) {
                stats.swap_random_tries += 1;
                stats.swap_random_accepts += acc as usize;
            }
            if let Some(acc) = label_swap_neighbor(state, rng) {
                stats.swap_neighbor_tries += 1;
                stats.swap_neighbor_accepts += acc as usize;
            }
        }
    }
    if let Some(prior) = cfg.alpha_prior {
        update_alpha(state, prior, rng);
    }
    state.trim();
    Ok(SweepRecord {
        alive: state.alloc.num_alive(),
        deviance: state.deviance(),
        frontier: state.sticks.frontier(),
        alpha: state.spec.alpha,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BaseMeasureParams;
    use crate::rng;

    fn spec() -> ModelSpec {
        ModelSpec::new(BaseMeasureParams::new(0.0, 4.0, 2.0, 1.0).unwrap(), 1.0).unwrap()
    }

    fn atom(mean: f64) -> ComponentParams {
        ComponentParams::new(mean, 1.0).unwrap()
    }

    fn state(k: Vec<usize>, sticks: Vec<f64>, means: Vec<f64>, data: Vec<f64>) -> ChainState {
        let atoms = means.into_iter().map(atom).collect();
        ChainState::new(
            data,
            spec(),
            AllocationState::new(k),
            StickState::from_parts(sticks, atoms).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn allocation_bookkeeping() {
        let mut a = AllocationState::new(vec![0, 0, 2]);
        assert_eq!(a.counts(), &[2, 0, 1]);
        assert_eq!(a.num_alive(), 2);
        assert_eq!(a.max_after_move(2, 0), 1);
        assert_eq!(a.max_after_move(0, 4), 5);
        assert_eq!(a.max_after_move(0, 1), 3);
        a.reassign(2, 1);
        assert_eq!(a.counts(), &[2, 1]);
        a.swap_labels(0, 3);
        assert_eq!(a.labels(), &[3, 3, 1]);
        assert_eq!(a.counts(), &[0, 1, 0, 2]);
        assert!(a.is_consistent());
    }

    #[test]
    fn v_conditional_parameters() {
        // Beta(3, 4) and Beta(4, 1) for K = (1,1,2,2,2), alpha = 1.
        let mut st = state(
            vec![0, 0, 1, 1, 1],
            vec![0.5, 0.5],
            vec![0.0, 0.0],
            vec![0.0; 5],
        );
        let mut r = rng::stream(1, 0);
        let reps = 40_000;
        let (mut s0, mut s1) = (0.0, 0.0);
        for _ in 0..reps {
            gibbs_update_v(&mut st, &mut r);
            s0 += st.sticks.stick(0);
            s1 += st.sticks.stick(1);
        }
        assert!((s0 / reps as f64 - 3.0 / 7.0).abs() < 0.005);
        assert!((s1 / reps as f64 - 0.8).abs() < 0.005);
    }

    #[test]
    fn v_conditional_without_data_is_prior() {
        let mut st = ChainState::new(
            vec![],
            spec(),
            AllocationState::new(vec![]),
            StickState::from_parts(vec![0.5], vec![atom(0.0)]).unwrap(),
        )
        .unwrap();
        let mut r = rng::stream(2, 0);
        let reps = 40_000;
        let m = (0..reps)
            .map(|_| {
                gibbs_update_v(&mut st, &mut r);
                st.sticks.stick(0)
            })
            .sum::<f64>()
            / reps as f64;
        assert!((m - 0.5).abs() < 0.006);
    }

    #[test]
    fn bound_is_max_density() {
        let st = state(vec![0, 1], vec![0.5, 0.5], vec![0.0, 1.0], vec![0.9, 0.2]);
        let m = proposal_bound(&st, 0);
        assert!((m - atom(1.0).log_density(0.9).exp()).abs() < 1e-15);
        for j in 0..2 {
            assert!(m >= st.sticks.atom(j).log_density(0.9).exp());
        }
        let single = state(vec![0], vec![0.5], vec![0.3], vec![1.0]);
        assert!((proposal_bound(&single, 0) - atom(0.3).log_density(1.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn normalizer_matches_hand_value() {
        // p = (0.5, 0.25), f = (0.2, 0.4): we build atoms with those densities at y.
        let y = 0.0;
        let var_for = |f: f64| 1.0 / (2.0 * std::f64::consts::PI * f * f);
        let z1 = ComponentParams::new(y, var_for(0.2)).unwrap();
        let z2 = ComponentParams::new(y, var_for(0.4)).unwrap();
        let st = ChainState::new(
            vec![y, y],
            spec(),
            AllocationState::new(vec![0, 1]),
            StickState::from_parts(vec![0.5, 0.5], vec![z1, z2]).unwrap(),
        )
        .unwrap();
        assert!((proposal_bound(&st, 0) - 0.4).abs() < 1e-12);
        assert!((proposal_normalizer(&st, 0) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn case_a_is_one() {
        let st = state(vec![0, 1, 1], vec![0.4, 0.3, 0.5], vec![0.0, 1.0, -1.0], vec![0.1, 0.8, 1.2]);
        let (a, case) = accept_probability(&st, 0, 1).unwrap();
        assert_eq!((a, case), (1.0, AcceptCase::Within));
    }

    #[test]
    fn tail_case_with_equal_terms_is_one() {
        // One component; proposing component 1 whose density equals M and the
        // normalizers coincide when the new atom duplicates the old one.
        let st = state(vec![0], vec![0.5, 0.5], vec![0.0, 0.0], vec![0.3]);
        let (a, case) = accept_probability(&st, 0, 1).unwrap();
        assert_eq!(case, AcceptCase::Tail);
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_sweep_is_identity() {
        let mut st = state(vec![0, 1, 1], vec![0.4, 0.3], vec![0.0, 1.0], vec![0.1, 0.8, 1.2]);
        let before = (st.alloc.clone(), st.sticks.clone());
        let mut r = rng::stream(3, 0);
        sweep(&mut st, &SweepConfig::frozen(), &mut r).unwrap();
        assert_eq!(before, (st.alloc.clone(), st.sticks.clone()));
    }

    #[test]
    fn sweep_keeps_bookkeeping() {
        let data: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { -2.0 } else { 2.0 } + 0.01 * i as f64).collect();
        let mut r = rng::stream(4, 0);
        let mut st = ChainState::initial(data, spec(), &mut r);
        let cfg = SweepConfig {
            alpha_prior: Some(GammaPrior { shape: 1.0, rate: 1.0 }),
            ..SweepConfig::default()
        };
        for _ in 0..300 {
            let rec = sweep(&mut st, &cfg, &mut r).unwrap();
            assert!(st.alloc.is_consistent());
            assert_eq!(st.sticks.frontier(), st.alloc.max_k());
            assert_eq!(rec.frontier, st.alloc.max_k());
            assert_eq!(rec.alive, st.alloc.num_alive());
            assert_eq!(rec.deviance, st.deviance());
            assert_eq!(st.alloc.counts().iter().sum::<usize>(), 30);
        }
    }

    #[test]
    fn swaps_need_two_components() {
        let mut st = state(vec![0, 0], vec![0.5], vec![0.0], vec![0.0, 0.1]);
        let mut r = rng::stream(5, 0);
        assert_eq!(label_swap_random(&mut st, &mut r), None);
    }

    #[test]
    fn random_swap_examples() {
        // p_j = p_l gives 1.
        let st = state(vec![0, 1], vec![0.5, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]);
        assert_eq!(random_swap_acceptance(&st, 0, 1), 1.0);
        // p_0 = 0.3, p_1 = 0.1, m = (5, 2): (0.3/0.1)^(2-5) = 1/27.
        let k = vec![0, 0, 0, 0, 0, 1, 1];
        let st = state(k, vec![0.3, 1.0 / 7.0], vec![0.0, 1.0], vec![0.0; 7]);
        assert!((st.sticks.weight(1) - 0.1).abs() < 1e-15);
        assert!((random_swap_acceptance(&st, 0, 1) - 1.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn neighbor_swap_examples() {
        // m_j = 0 below the top: always accepted.
        let st = state(vec![1, 2], vec![0.4, 0.3, 0.6], vec![0.0, 1.0, 2.0], vec![0.0, 1.0]);
        assert_eq!(neighbor_swap_acceptance(&st, 0), 1.0);
        // Equal sticks and counts.
        let st = state(vec![0, 1], vec![0.4, 0.4, 0.2], vec![0.0, 1.0, 2.0], vec![0.0, 1.0]);
        assert_eq!(neighbor_swap_acceptance(&st, 0), 1.0);
    }

    #[test]
    fn alpha_conjugate_example() {
        let mut st = state(vec![0], vec![1.0 - (-1.0f64).exp()], vec![0.0], vec![0.0]);
        let prior = GammaPrior { shape: 1.0, rate: 1.0 };
        let (a, b) = alpha_posterior(&st, prior);
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        st.alloc = AllocationState::new(vec![]);
        st.data.clear();
        assert_eq!(alpha_posterior(&st, prior), (1.0, 1.0));
    }
}
