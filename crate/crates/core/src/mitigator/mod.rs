//! Adaptive multi-level mitigation: the break-even escalation planner and
//! the strategy implementations (micro-batch rebalancing, topology swap,
//! straggler consolidation, checkpoint-restart cost model).

mod consolidate;
mod microbatch;
mod planner;
mod strategy;
mod swap;

pub use consolidate::{consolidate_stragglers, interior_stage_order, stages_holding};
pub use microbatch::{solve_microbatch, MicrobatchPlan};
pub use planner::{MitigationState, DEFAULT_IMPACT_NOISE_BAND, DEFAULT_MIN_IMPROVEMENT};
pub use strategy::{
    find_strategies, solver_time_estimate, strategy_overheads, OverheadConfig, Strategy,
    StrategyId, StrategyOverheads,
};
pub use swap::{logical_traffic, plan_topology_swap, LinkBandwidths, SwapPlan, SwapSearch};
