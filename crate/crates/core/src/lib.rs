//! Truncation-free inference for Dirichlet process mixture models.
//!
//! The random measure is represented by its stick-breaking pairs `(V_j, Z_j)`
//! realized lazily: a sampler only ever draws as many pairs as a decision
//! needs, so no truncation level enters the posterior.
//!
//! Component indices are zero-based throughout the library. The value
//! [`retro_conditional::AllocationState::max_k`] is the length of the
//! occupied prefix, which coincides with the largest one-based label.

pub mod diagnostics;
pub mod error;
pub mod exact_allocation;
pub mod functionals;
pub mod harness;
pub mod marginal;
pub mod model;
pub mod retro_conditional;
pub mod rng;
pub mod stick_breaking;

pub use error::{Error, Result};
pub use model::{BaseMeasureParams, ComponentParams, ModelSpec, VarianceMode};
pub use retro_conditional::{AllocationState, ChainState, SweepConfig};
pub use stick_breaking::StickState;
