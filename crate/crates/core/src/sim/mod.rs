//! Deterministic analytic simulator of hybrid-parallel training: iteration
//! times under injectable fail-slows, trace emission, and the closed loop
//! that couples detection, localization and mitigation back into the
//! simulated world.

mod closed_loop;
mod engine;
pub mod report;
mod scenario;
mod trace_gen;

pub use closed_loop::{
    run_closed_loop, ActionRecord, EventRecord, IterRecord, LadderToggles, LoopConfig,
    MitigationConfig, RunReport,
};
pub use engine::{
    effective_bandwidth, effective_link_bandwidths, effective_speed, healthy_baselines,
    iteration_time, run_benchmarks, volumes, BenchmarkConfig, IterationBreakdown, WorldView,
};
pub use scenario::{
    ClusterScenario, InjectionEvent, InjectionTarget, DEFAULT_JITTER_SIGMA,
};
pub use trace_gen::{emit_trace, static_iteration_times};
