//! Profiling and validation phase: suspicious-group classification,
//! ring/tree P2P validation schedules, and benchmark-based localization.

mod localize;
mod profile;
mod schedule;

pub use localize::{localize, BenchmarkResults, HealthyBaselines};
pub use profile::{classify_groups, GroupProfile, SUSPICIOUS_FACTOR};
pub use schedule::{ring_schedule, tree_schedule, TreeTopology, ValidationSchedule};
