//! Exact retrospective sampling from `r_j = p_j f_j / sum_l p_l f_l`.
//!
//! With `f_j <= M`, the unknown normalizer is sandwiched by
//! `c_l(k) = sum_{j<=k} p_j f_j` and `c_u(k) = c_l(k) + M (1 - sum_{j<=k} p_j)`.
//! A uniform `U` identifies `J = j` once
//! `sum_{m<j} r_m / c_l(k) <= U <= sum_{m<=j} r_m / c_u(k)`; otherwise one
//! more pair is realized and the test repeats.

use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::retro_conditional::ChainState;
use crate::stick_breaking::StickState;

/// Rounding slack allowed when checking `f_j <= M`.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsPair {
    pub c_lower: f64,
    pub c_upper: f64,
    pub k: usize,
}

/// Weights from a stick state paired with factors `f_j <= bound`.
///
/// `factor(j, sticks)` is evaluated once per realized `j`; it may look at the
/// sticks (the factors need not be independent of the weights for the
/// sandwich to hold, only bounded).
pub struct BoundedWeightedStream<'a, F> {
    sticks: &'a mut StickState,
    spec: &'a ModelSpec,
    factor: F,
    bound: f64,
    /// `cum[j]` = sum of `p_m f_m` over `m < j`.
    cum: Vec<f64>,
}

impl<'a, F> BoundedWeightedStream<'a, F>
where
    F: FnMut(usize, &StickState) -> f64,
{
    pub fn new(sticks: &'a mut StickState, spec: &'a ModelSpec, bound: f64, factor: F) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::InvalidParameter(format!("bound must be positive, got {bound}")));
        }
        Ok(Self {
            sticks,
            spec,
            factor,
            bound,
            cum: vec![0.0],
        })
    }

    /// Number of `(p_j, f_j)` pairs seen by the stream so far.
    pub fn realized(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Realizes pairs `0..k`, drawing sticks from the prior past the frontier.
    pub fn realize<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<()> {
        while self.realized() < k {
            let j = self.realized();
            if j >= self.sticks.frontier() {
                self.sticks.extend_to(j + 1, self.spec, rng);
            }
            let f = (self.factor)(j, self.sticks);
            if !(f >= 0.0) || f > self.bound * (1.0 + BOUND_SLACK) {
                return Err(Error::BoundViolation {
                    value: f,
                    bound: self.bound,
                });
            }
            let f = f.min(self.bound);
            let last = *self.cum.last().expect("non-empty");
            self.cum.push(last + self.sticks.weight(j) * f);
        }
        Ok(())
    }

    /// Lower and upper bounds on the normalizer from the first `k` pairs.
    pub fn bounds(&self, k: usize) -> Result<BoundsPair> {
        if k > self.realized() {
            return Err(Error::FrontierViolation {
                index: k,
                frontier: self.realized(),
            });
        }
        let c_lower = self.cum[k];
        let c_upper = c_lower + self.bound * self.sticks.tail_mass(k);
        Ok(BoundsPair { c_lower, c_upper, k })
    }

    /// Draws `J` exactly from `r_j`.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let u: f64 = Open01.sample(rng);
        self.sample_with_uniform(u, rng)
    }

    /// The sandwich search for a given uniform; pairs are realized on demand.
    pub fn sample_with_uniform<R: Rng + ?Sized>(&mut self, u: f64, rng: &mut R) -> Result<usize> {
        let mut k = 1;
        loop {
            self.realize(k, rng)?;
            let b = self.bounds(k)?;
            if b.c_lower > 0.0 {
                // Only the first j whose upper end reaches U can qualify; ties go to it.
                let reach = u * b.c_upper;
                if let Some(j) = (0..k).find(|&j| reach <= self.cum[j + 1]) {
                    if self.cum[j] <= u * b.c_lower {
                        return Ok(j);
                    }
                }
            }
            k += 1;
        }
    }
}

/// Bounds of a stream at prefix length `k`.
pub fn bounds<F>(stream: &BoundedWeightedStream<'_, F>, k: usize) -> Result<BoundsPair>
where
    F: FnMut(usize, &StickState) -> f64,
{
    stream.bounds(k)
}

pub fn sample_exact<F, R>(stream: &mut BoundedWeightedStream<'_, F>, rng: &mut R) -> Result<usize>
where
    F: FnMut(usize, &StickState) -> f64,
    R: Rng + ?Sized,
{
    stream.sample(rng)
}

/// Exact Gibbs update of every allocation from
/// `pr(K_i = j | Y, V, Z) ∝ p_j f(Y_i | Z_j)`.
///
/// Requires the fixed-variance kernel. Returns the total number of pairs
/// examined over all data.
pub fn gibbs_update_allocations_exact<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Result<usize> {
    let bound = state.spec.likelihood_bound()?;
    let spec = state.spec;
    let mut examined = 0;
    for i in 0..state.data.len() {
        let y = state.data[i];
        let mut stream = BoundedWeightedStream::new(&mut state.sticks, &spec, bound, |j, s: &StickState| {
            s.atom(j).log_density(y).exp()
        })?;
        let j = stream.sample(rng)?;
        examined += stream.realized();
        state.alloc.reassign(i, j);
    }
    state.trim();
    Ok(examined)
}
