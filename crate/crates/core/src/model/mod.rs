//! Shared domain types: topology, traces, events and traffic volumes.

mod event;
pub mod topology;
mod trace;
mod traffic;

pub use event::{FailSlowEvent, FailSlowKind};
pub use topology::{
    ComponentId, GpuId, GpuSlot, Link, LinkId, NodeId, ParallelTopology, Placement, RankCoords,
    RankId,
};
pub use trace::{CallTrace, CollectiveKind, CommCall};
pub use traffic::{comm_volumes, CommVolumes, TrafficModel};
