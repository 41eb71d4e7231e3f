//! Trace-driven cache replacement simulation toolkit.
//!
//! The crate provides:
//!
//! - [`types`]: the domain types (requests, slot-ordered cache state, per-request
//!   outcomes) and the [`Policy`] contract every eviction algorithm implements.
//! - [`baselines`]: FIFO, LRU, CLIMB, LFU, CLOCK and SIEVE reference policies.
//! - [`adaptive`]: the AdaptiveClimb policy, which tunes its promotion distance
//!   (`jump`) from hit/miss feedback.
//! - [`dynamic`]: the DynamicAdaptiveClimb policy, which additionally doubles or
//!   halves the cache capacity based on two promotion counters.
//! - [`analytics`]: closed-form stationary distributions for LRU/CLIMB under the
//!   independent-requests model, plus an exact Markov-chain oracle for small
//!   instances.
//! - [`workload`]: seedable Zipf and phase-shift request stream generators.
//! - [`trace`]: CSV and binary trace file formats with streaming readers.
//! - [`harness`]: the simulation driver, miss-ratio-reduction metrics, sweeps,
//!   and report emission.
//!
//! All randomness is derived from explicit 64-bit seeds through SplitMix64, so
//! every stream and report is reproducible bit-for-bit.

pub mod adaptive;
pub mod analytics;
pub mod baselines;
pub mod dynamic;
pub mod harness;
pub mod trace;
pub mod types;
pub mod workload;

pub use adaptive::AdaptiveClimb;
pub use baselines::{Climb, Clock, Fifo, Lfu, Lru, Sieve};
pub use dynamic::DynamicAdaptiveClimb;
pub use types::{
    CacheState, ConfigError, Policy, PolicyConfig, PolicyKind, PolicyOutcome, RequestRecord,
    ResizeEvent, ResizeKind, Telemetry,
};

/// Builds the policy described by `config` after validating it.
pub fn build_policy(config: &PolicyConfig) -> Result<Box<dyn Policy>, ConfigError> {
    config.validate()?;
    let k = config.capacity;
    Ok(match config.kind {
        PolicyKind::Fifo => Box::new(Fifo::new(k)),
        PolicyKind::Lru => Box::new(Lru::new(k)),
        PolicyKind::Climb => Box::new(Climb::new(k)),
        PolicyKind::Lfu => Box::new(Lfu::new(k)),
        PolicyKind::Clock => Box::new(Clock::new(k)),
        PolicyKind::Sieve => Box::new(Sieve::new(k)),
        PolicyKind::AdaptiveClimb => Box::new(AdaptiveClimb::new(k)),
        PolicyKind::DynamicAdaptiveClimb => Box::new(DynamicAdaptiveClimb::new(
            k,
            config.epsilon.unwrap_or(0.5),
            config.k_min.unwrap_or(2),
            config.k_max.unwrap_or(k),
        )),
    })
}
