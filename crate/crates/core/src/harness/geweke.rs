//! Geweke joint-distribution models for the shipped samplers.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::diagnostics::{geweke_test, GewekeModel, GewekeReport};
use crate::error::{Error, Result};
use crate::marginal::{self, ClusterState};
use crate::model::{BaseMeasureParams, ComponentParams, ModelSpec, VarianceMode};
use crate::retro_conditional::{self, AllocationKernel, AllocationState, ChainState, GammaPrior, KernelMutation, SweepConfig};
use crate::rng::{self, streams};
use crate::stick_breaking::{sample_polya_urn, sample_prior_retrospective};

use super::config::SamplerKind;

pub const GEWEKE_N: usize = 5;
pub const GEWEKE_FIXED_VARIANCE: f64 = 0.5;

pub fn geweke_base() -> BaseMeasureParams {
    BaseMeasureParams::new(0.0, 1.0, 3.0, 2.0).expect("valid base")
}

fn draw_observations<R: Rng + ?Sized>(atoms: impl Iterator<Item = ComponentParams>, rng: &mut R) -> Vec<f64> {
    atoms
        .map(|z| Normal::new(z.mean, z.variance.sqrt()).expect("valid normal").sample(rng))
        .collect()
}

/// The conditional samplers: parameters are `(K, V, Z)` and optionally `alpha`.
pub struct RetroGeweke {
    pub base: BaseMeasureParams,
    pub variance: VarianceMode,
    pub alpha: f64,
    pub n: usize,
    pub cfg: SweepConfig,
}

impl RetroGeweke {
    fn spec_with(&self, alpha: f64) -> ModelSpec {
        ModelSpec::with_variance(self.base, alpha, self.variance).expect("valid spec")
    }
}

impl GewekeModel for RetroGeweke {
    type Params = ChainState;
    type Data = Vec<f64>;

    fn sample_joint<R: Rng + ?Sized>(&self, rng: &mut R) -> (ChainState, Vec<f64>) {
        let alpha = match self.cfg.alpha_prior {
            Some(p) => Gamma::new(p.shape, 1.0 / p.rate).expect("valid gamma").sample(rng),
            None => self.alpha,
        };
        let spec = self.spec_with(alpha);
        let (prior, mut sticks) = sample_prior_retrospective(self.n, &spec, rng);
        let alloc = AllocationState::new(prior.allocations);
        sticks.truncate(alloc.max_k());
        let data = draw_observations(prior.values.into_iter(), rng);
        let state = ChainState::new(data.clone(), spec, alloc, sticks).expect("consistent prior draw");
        (state, data)
    }

    fn transition<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &Vec<f64>, rng: &mut R) -> Result<()> {
        state.data.clone_from(data);
        retro_conditional::sweep(state, &self.cfg, rng)?;
        Ok(())
    }

    fn regenerate<R: Rng + ?Sized>(&self, state: &ChainState, rng: &mut R) -> Vec<f64> {
        draw_observations(state.alloc.labels().iter().map(|&k| *state.sticks.atom(k)), rng)
    }

    fn statistic_names(&self) -> Vec<String> {
        let mut v: Vec<String> = ["M", "V_1", "p_1", "z1_mean", "y_1"].iter().map(|s| s.to_string()).collect();
        if self.cfg.alpha_prior.is_some() {
            v.push("alpha".into());
        }
        v
    }

    fn statistics(&self, state: &ChainState, data: &Vec<f64>) -> Vec<f64> {
        let mut v = vec![
            state.alloc.num_alive() as f64,
            state.sticks.stick(0),
            state.sticks.weight(0),
            state.sticks.atom(state.alloc.label(0)).mean,
            data[0],
        ];
        if self.cfg.alpha_prior.is_some() {
            v.push(state.spec.alpha);
        }
        v
    }
}

/// The marginal sampler. Sticks do not exist in its state, so the checked
/// statistics are the cluster count and the cluster of the first datum.
pub struct Neal8Geweke {
    pub spec: ModelSpec,
    pub n: usize,
    pub m_aux: usize,
}

impl GewekeModel for Neal8Geweke {
    type Params = ClusterState;
    type Data = Vec<f64>;

    fn sample_joint<R: Rng + ?Sized>(&self, rng: &mut R) -> (ClusterState, Vec<f64>) {
        let (labels, params) = sample_polya_urn(self.n, &self.spec, rng);
        let cs = ClusterState::new(labels, params).expect("urn draw is consistent");
        let data = self.regenerate(&cs, rng);
        (cs, data)
    }

    fn transition<R: Rng + ?Sized>(&self, cs: &mut ClusterState, data: &Vec<f64>, rng: &mut R) -> Result<()> {
        marginal::neal8_sweep(cs, data, &self.spec, self.m_aux, rng)
    }

    fn regenerate<R: Rng + ?Sized>(&self, cs: &ClusterState, rng: &mut R) -> Vec<f64> {
        draw_observations((0..cs.labels().len()).map(|i| *cs.param_of(i)), rng)
    }

    fn statistic_names(&self) -> Vec<String> {
        ["M", "z1_mean", "z1_var", "size_1", "y_1"].iter().map(|s| s.to_string()).collect()
    }

    fn statistics(&self, cs: &ClusterState, data: &Vec<f64>) -> Vec<f64> {
        let z = cs.param_of(0);
        vec![
            cs.num_clusters() as f64,
            z.mean,
            z.variance,
            cs.sizes()[cs.labels()[0]] as f64,
            data[0],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GewekeOptions {
    pub sampler: SamplerKind,
    pub iterations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub alpha_prior: Option<GammaPrior>,
    pub mutation: KernelMutation,
    pub label_swap: bool,
}

impl GewekeOptions {
    pub fn new(sampler: SamplerKind, iterations: usize, seed: u64) -> Self {
        Self {
            sampler,
            iterations,
            seed,
            alpha: 1.0,
            alpha_prior: None,
            mutation: KernelMutation::None,
            label_swap: true,
        }
    }
}

/// Runs the joint-distribution test for one sampler on `GEWEKE_N` data points.
pub fn run_geweke(opts: &GewekeOptions) -> Result<GewekeReport> {
    let mut rm = rng::stream(opts.seed, streams::GEWEKE_PRIOR);
    let mut rc = rng::stream(opts.seed, streams::GEWEKE_CHAIN);
    let retro = |kernel, variance| RetroGeweke {
        base: geweke_base(),
        variance,
        alpha: opts.alpha,
        n: GEWEKE_N,
        cfg: SweepConfig {
            allocation_kernel: kernel,
            label_swap: opts.label_swap,
            alpha_prior: opts.alpha_prior,
            mutation: opts.mutation,
            ..SweepConfig::default()
        },
    };
    match opts.sampler {
        SamplerKind::RetroMh => geweke_test(
            &retro(AllocationKernel::Metropolis, VarianceMode::Free),
            opts.iterations,
            &mut rm,
            &mut rc,
        ),
        SamplerKind::RetroExact => geweke_test(
            &retro(AllocationKernel::Exact, VarianceMode::Fixed(GEWEKE_FIXED_VARIANCE)),
            opts.iterations,
            &mut rm,
            &mut rc,
        ),
        SamplerKind::Neal8 => {
            if opts.alpha_prior.is_some() {
                return Err(Error::Config("alpha updates are not implemented for neal8".into()));
            }
            let model = Neal8Geweke {
                spec: ModelSpec::new(geweke_base(), opts.alpha)?,
                n: GEWEKE_N,
                m_aux: marginal::DEFAULT_AUX,
            };
            geweke_test(&model, opts.iterations, &mut rm, &mut rc)
        }
    }
}
