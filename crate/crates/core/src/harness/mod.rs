//! Experiment driver: datasets, configuration, sampler runs, traces,
//! summaries, comparisons and the observed-partition experiment.

pub mod compare;
pub mod config;
pub mod data;
pub mod geweke;
pub mod observed;
pub mod plot;
pub mod run;
pub mod trace;

pub use compare::{compare, ComparisonTable};
pub use config::{AlphaSetting, DatasetSource, RunConfig, SamplerKind};
pub use data::{generate_data, parse_data, DatasetName};
pub use observed::{run_observed_partition, ObservedPartitionOutput};
pub use run::{run, RunOutput};
pub use trace::{Summary, Trace, TraceHeader, TraceRecord};
