//! Linear functionals `∫ g dP` and the predominant species of the random
//! measure, under the prior and under the posterior.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{ComponentParams, ModelSpec};
use crate::retro_conditional::ChainState;
use crate::stick_breaking::StickState;

/// A bounded test function with a truncation budget for prior draws.
pub struct FunctionalSpec<G> {
    pub g: G,
    pub sup_abs_g: f64,
    pub tolerance: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

impl<G: Fn(&ComponentParams) -> f64> FunctionalSpec<G> {
    pub fn new(g: G, sup_abs_g: f64, tolerance: f64) -> Result<Self> {
        if !(sup_abs_g >= 0.0) || !sup_abs_g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "g must have a finite bound, got {sup_abs_g}"
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
        }
        Ok(Self {
            g,
            sup_abs_g,
            tolerance,
        })
    }

    fn eval(&self, z: &ComponentParams) -> f64 {
        let v = (self.g)(z);
        assert!(
            v.abs() <= self.sup_abs_g,
            "|g(z)| = {} exceeds its declared bound {}",
            v.abs(),
            self.sup_abs_g
        );
        v
    }
}

/// Prior draw of `∫ g dP`, truncated once `sup|g| * tail < tolerance`.
///
/// The omitted tail contributes at most `sup|g| * tail` in absolute value,
/// so the returned value is within `tolerance` of an exact draw.
pub fn prior_linear_functional_draw<G, R>(fs: &FunctionalSpec<G>, spec: &ModelSpec, rng: &mut R) -> f64
where
    G: Fn(&ComponentParams) -> f64,
    R: Rng + ?Sized,
{
    if fs.sup_abs_g == 0.0 {
        return 0.0;
    }
    let mut sticks = StickState::new();
    let mut sum = 0.0;
    let mut j = 0;
    while fs.sup_abs_g * sticks.log_tail_mass().exp() >= fs.tolerance {
        sticks.extend_to(j + 1, spec, rng);
        sum += fs.eval(sticks.atom(j)) * sticks.weight(j);
        j += 1;
    }
    sum
}

/// Posterior draw of `∫ g dP` from a sampler state:
/// `sum_{j<max_k} g(Z_j) p_j + I * prod_{l<max_k} (1 - V_l)` with `I` a fresh
/// prior draw.
pub fn posterior_linear_functional_draw<G, R>(state: &ChainState, fs: &FunctionalSpec<G>, rng: &mut R) -> f64
where
    G: Fn(&ComponentParams) -> f64,
    R: Rng + ?Sized,
{
    let len = state.alloc.max_k().min(state.sticks.frontier());
    let head: f64 = (0..len)
        .map(|j| fs.eval(state.sticks.atom(j)) * state.sticks.weight(j))
        .sum();
    let tail = state.sticks.tail_mass(len);
    if tail == 0.0 {
        return head;
    }
    head + prior_linear_functional_draw(fs, &state.spec, rng) * tail
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredominantSpecies {
    pub index: usize,
    pub atom: ComponentParams,
    pub weight: f64,
}

/// The component with the largest weight in the whole infinite sequence.
///
/// Extends `sticks` from the prior until the unassigned mass falls below the
/// current maximum weight; after that no later component can overtake it.
/// The pairs beyond the frontier must be prior draws given everything else,
/// which holds for a sampler state whose frontier is at least `max_k`.
pub fn predominant_species<R: Rng + ?Sized>(
    sticks: &mut StickState,
    spec: &ModelSpec,
    rng: &mut R,
) -> PredominantSpecies {
    if sticks.frontier() == 0 {
        sticks.extend_to(1, spec, rng);
    }
    let mut best = 0;
    let mut best_w = sticks.weight(0);
    for j in 1..sticks.frontier() {
        let w = sticks.weight(j);
        if w > best_w {
            best = j;
            best_w = w;
        }
    }
    while sticks.log_tail_mass().exp() >= best_w {
        let j = sticks.frontier();
        sticks.extend_to(j + 1, spec, rng);
        let w = sticks.weight(j);
        if w > best_w {
            best = j;
            best_w = w;
        }
    }
    PredominantSpecies {
        index: best,
        atom: *sticks.atom(best),
        weight: best_w,
    }
}
