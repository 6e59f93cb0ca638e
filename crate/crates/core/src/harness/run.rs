//! The `run` driver: one chain of the configured sampler, its trace and summary.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::marginal::{self, ClusterState};
use crate::model::{data_driven_hyperparams, ModelSpec, VarianceMode};
use crate::retro_conditional::{self, AllocationKernel, ChainState, SweepConfig};
use crate::rng::{self, streams, RNG_ALGORITHM};

use super::config::{DatasetSource, RunConfig, SamplerKind};
use super::data::{generate_data, read_data_file};
use super::trace::{Summary, Trace, TraceHeader, TraceRecord, TRACE_VERSION};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub summary: Summary,
}

pub fn load_data(cfg: &RunConfig) -> Result<Vec<f64>> {
    match &cfg.dataset {
        DatasetSource::Named(name) => Ok(generate_data(*name, cfg.n, cfg.data_seed.unwrap_or(cfg.seed))),
        DatasetSource::File(path) => read_data_file(path),
    }
}

pub fn model_for(cfg: &RunConfig, data: &[f64]) -> Result<ModelSpec> {
    let base = data_driven_hyperparams(data, cfg.hyper_mu)?;
    let variance = match cfg.fixed_variance {
        Some(v) => VarianceMode::Fixed(v),
        None => VarianceMode::Free,
    };
    ModelSpec::with_variance(base, cfg.initial_alpha(), variance)
}

pub fn sweep_config(cfg: &RunConfig) -> SweepConfig {
    SweepConfig {
        allocation_kernel: match cfg.sampler {
            SamplerKind::RetroExact => AllocationKernel::Exact,
            _ => AllocationKernel::Metropolis,
        },
        accelerations: cfg.accelerations,
        random_scan: cfg.random_scan,
        label_swap: cfg.label_swap,
        alpha_prior: cfg.alpha_prior(),
        ..SweepConfig::default()
    }
}

enum Chain {
    Retro(ChainState, SweepConfig),
    Neal(ClusterState, Vec<f64>, ModelSpec, usize),
}

/// Runs the configured chain and returns its post-burn-in trace and summary.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let data = load_data(cfg)?;
    let monitored = cfg.monitored_indices();
    if let Some(&bad) = monitored.iter().find(|&&i| i > data.len()) {
        return Err(Error::Config(format!("monitored index {bad} exceeds n = {}", data.len())));
    }
    let spec = model_for(cfg, &data)?;
    if cfg.sampler == SamplerKind::RetroExact {
        spec.likelihood_bound()?;
    }
    let (iterations, burn_in) = cfg.schedule();
    let n = data.len();

    let mut init_rng = rng::stream(cfg.seed, streams::INIT);
    let mut rng = rng::stream(cfg.seed, streams::CHAIN);
    let mut chain = match cfg.sampler {
        SamplerKind::Neal8 => Chain::Neal(
            ClusterState::single_cluster(n, &spec, &mut init_rng),
            data,
            spec,
            cfg.m_aux,
        ),
        _ => Chain::Retro(ChainState::initial(data, spec, &mut init_rng), sweep_config(cfg)),
    };

    let mut records = Vec::with_capacity(iterations - burn_in);
    for iter in 0..iterations {
        let record = match &mut chain {
            Chain::Retro(state, sc) => {
                let r = retro_conditional::sweep(state, sc, &mut rng)?;
                TraceRecord {
                    iter,
                    clusters: r.alive,
                    deviance: r.deviance,
                    n_star: r.frontier,
                    accept_rate: r.stats.accept_rate(),
                    swap_random_accepts: r.stats.swap_random_accepts,
                    swap_neighbor_accepts: r.stats.swap_neighbor_accepts,
                    alpha: r.alpha,
                    monitored: monitored
                        .iter()
                        .map(|&i| state.sticks.atom(state.alloc.label(i - 1)).mean)
                        .collect(),
                }
            }
            Chain::Neal(cs, data, spec, m_aux) => {
                marginal::neal8_sweep(cs, data, spec, *m_aux, &mut rng)?;
                let zero_based: Vec<usize> = monitored.iter().map(|&i| i - 1).collect();
                let st = marginal::monitored_stats(cs, data, &zero_based);
                TraceRecord {
                    iter,
                    clusters: st.clusters,
                    deviance: st.deviance,
                    n_star: 0,
                    accept_rate: f64::NAN,
                    swap_random_accepts: 0,
                    swap_neighbor_accepts: 0,
                    alpha: spec.alpha,
                    monitored: st.monitored_means,
                }
            }
        };
        if iter >= burn_in {
            records.push(record);
        }
    }

    let trace = Trace {
        header: TraceHeader {
            version: TRACE_VERSION,
            sampler: cfg.sampler.name().to_string(),
            rng: RNG_ALGORITHM.to_string(),
            seed: cfg.seed,
            data_seed: cfg.data_seed.unwrap_or(cfg.seed),
            alpha_updated: cfg.alpha_prior().is_some(),
            monitored,
            n,
            dataset: cfg.dataset.label(),
        },
        records,
    };
    let summary = Summary::from_trace(&trace)?;
    Ok(RunOutput { trace, summary })
}

/// Writes `trace.csv`, `summary.txt` and `summary.kv` into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join("trace.csv"))?;
    out.trace.write_to(std::io::BufWriter::new(file))?;
    fs::write(dir.join("summary.txt"), out.summary.to_table())?;
    fs::write(dir.join("summary.kv"), out.summary.to_kv())?;
    Ok(())
}
