use crate::model::{FailSlowKind, TrafficModel};

/// The four mitigation levels, ordered by action overhead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StrategyId {
    /// Do nothing and wait for self-recovery.
    S1,
    /// Redistribute micro-batches across DP groups.
    S2,
    /// Adjust the parallelism topology (link reassignment, consolidation).
    S3,
    /// Checkpoint and restart on healthy components.
    S4,
}

impl std::fmt::Display for StrategyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StrategyId::S1 => "S1",
            StrategyId::S2 => "S2",
            StrategyId::S3 => "S3",
            StrategyId::S4 => "S4",
        };
        f.write_str(s)
    }
}

/// A strategy with its one-off action cost in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub id: StrategyId,
    pub overhead: f64,
}

/// Candidate strategies for a root cause, ordered by overhead.
/// Micro-batch redistribution only helps computation stragglers; it has no
/// effect on slow communication, so it is excluded there and for unknown
/// causes.
pub fn find_strategies(root_cause: FailSlowKind) -> Vec<StrategyId> {
    match root_cause {
        FailSlowKind::Computation => {
            vec![StrategyId::S1, StrategyId::S2, StrategyId::S3, StrategyId::S4]
        }
        FailSlowKind::Communication | FailSlowKind::Unknown => {
            vec![StrategyId::S1, StrategyId::S3, StrategyId::S4]
        }
    }
}

/// Knobs for the per-strategy overhead model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadConfig {
    /// Pause cost of a topology adjustment (pause, dump to memory, RDMA
    /// swap, resume).
    pub s3_pause_s: f64,
    /// Sustained checkpoint write bandwidth in bytes/s. The default is
    /// sized so dumping a 100B-parameter half-precision model takes about
    /// 100 minutes.
    pub storage_bandwidth: f64,
    /// Fixed restart cost added on top of the checkpoint dump.
    pub restart_fixed_s: f64,
}

impl Default for OverheadConfig {
    fn default() -> Self {
        Self {
            s3_pause_s: 60.0,
            storage_bandwidth: 2.0e11 / 6000.0,
            restart_fixed_s: 300.0,
        }
    }
}

/// Measured micro-batch solver times by DP group count.
const SOLVER_TIME_TABLE: [(f64, f64); 6] = [
    (16.0, 0.01),
    (32.0, 0.01),
    (64.0, 0.01),
    (128.0, 0.11),
    (256.0, 6.78),
    (512.0, 35.93),
];

/// Piecewise-linear interpolation of the solver-time table, clamped at the
/// ends.
pub fn solver_time_estimate(dp_size: usize) -> f64 {
    let d = dp_size as f64;
    if d <= SOLVER_TIME_TABLE[0].0 {
        return SOLVER_TIME_TABLE[0].1;
    }
    for pair in SOLVER_TIME_TABLE.windows(2) {
        let (d0, t0) = pair[0];
        let (d1, t1) = pair[1];
        if d <= d1 {
            return t0 + (t1 - t0) * (d - d0) / (d1 - d0);
        }
    }
    SOLVER_TIME_TABLE[SOLVER_TIME_TABLE.len() - 1].1
}

/// Per-strategy one-off action costs in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyOverheads {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

impl StrategyOverheads {
    pub fn get(&self, id: StrategyId) -> f64 {
        match id {
            StrategyId::S1 => self.s1,
            StrategyId::S2 => self.s2,
            StrategyId::S3 => self.s3,
            StrategyId::S4 => self.s4,
        }
    }

    /// Strategy list for a root cause with overheads attached, sorted by
    /// overhead.
    pub fn candidates(&self, root_cause: FailSlowKind) -> Vec<Strategy> {
        let mut out: Vec<Strategy> = find_strategies(root_cause)
            .into_iter()
            .map(|id| Strategy {
                id,
                overhead: self.get(id),
            })
            .collect();
        out.sort_by(|a, b| a.overhead.total_cmp(&b.overhead).then(a.id.cmp(&b.id)));
        out
    }
}

/// Computes the ladder costs: ignoring is free, the micro-batch solver
/// costs a lookup-calibrated few seconds, topology adjustment costs one
/// pause, and checkpoint-restart scales with parameter bytes over storage
/// bandwidth.
pub fn strategy_overheads(
    model: &TrafficModel,
    dp_size: usize,
    config: &OverheadConfig,
) -> StrategyOverheads {
    let param_bytes = model.param_count() as f64 * model.element_bytes as f64;
    StrategyOverheads {
        s1: 0.0,
        s2: solver_time_estimate(dp_size),
        s3: config.s3_pause_s,
        s4: param_bytes / config.storage_bandwidth + config.restart_fixed_s,
    }
}
