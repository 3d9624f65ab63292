//! Posterior exploration: MAP search, adaptive Metropolis-Hastings and chain diagnostics.

pub mod ess;
pub mod mh;
pub mod optimize;

pub use ess::{effective_sample_size, Ess};
pub use mh::{run_adaptive_mh, run_chains, AdaptiveMetropolis, ChainResult, SamplerSettings, StepRecord};
pub use optimize::{find_map, MapResult, MapSettings};
