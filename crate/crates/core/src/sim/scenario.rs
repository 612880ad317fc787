use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{GpuId, LinkId, ParallelTopology, TrafficModel};

/// What an injection degrades.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectionTarget {
    /// Compute slowdown, like a locked SM frequency.
    Gpu(GpuId),
    /// Bandwidth contention on one inter-node link.
    Link(LinkId),
}

/// A manually injected fail-slow: a multiplicative capacity reduction over
/// an iteration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionEvent {
    pub target: InjectionTarget,
    /// Remaining capacity fraction, in (0, 1).
    pub factor: f64,
    /// First affected iteration.
    pub start_iter: usize,
    /// One past the last affected iteration.
    pub end_iter: usize,
}

impl InjectionEvent {
    pub fn active_at(&self, iter: usize) -> bool {
        (self.start_iter..self.end_iter).contains(&iter)
    }
}

/// The simulated world: cluster shape, model shape, baseline speeds,
/// injection schedule and horizon.
#[derive(Debug, Clone)]
pub struct ClusterScenario {
    pub topo: ParallelTopology,
    pub model: TrafficModel,
    /// Baseline relative speed per GPU, 1.0 = healthy. Missing entries
    /// default to 1.0.
    pub gpu_speed: BTreeMap<GpuId, f64>,
    /// Seconds per micro-batch per stage at speed 1.0.
    pub base_compute: f64,
    pub injections: Vec<InjectionEvent>,
    pub horizon: usize,
    pub seed: u64,
    /// Gaussian measurement noise as a fraction of each duration.
    pub jitter_sigma: f64,
}

pub const DEFAULT_JITTER_SIGMA: f64 = 0.005;

impl ClusterScenario {
    pub fn validate(&self) -> Result<()> {
        self.topo.validate()?;
        if self.horizon == 0 {
            return Err(Error::InvalidScenario("horizon must be at least 1".into()));
        }
        if self.base_compute.is_nan() || self.base_compute <= 0.0 {
            return Err(Error::InvalidScenario(
                "base_compute must be positive".into(),
            ));
        }
        if self.jitter_sigma < 0.0 {
            return Err(Error::InvalidScenario(
                "jitter_sigma must be nonnegative".into(),
            ));
        }
        for (&gpu, &speed) in &self.gpu_speed {
            if gpu >= self.topo.total_gpus() {
                return Err(Error::InvalidScenario(format!(
                    "gpu_speed entry for unknown gpu {gpu}"
                )));
            }
            if !(speed > 0.0 && speed <= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "gpu {gpu} speed {speed} outside (0, 1]"
                )));
            }
        }
        for (i, inj) in self.injections.iter().enumerate() {
            if !(inj.factor > 0.0 && inj.factor < 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "injection {i}: factor {} outside (0, 1)",
                    inj.factor
                )));
            }
            if inj.start_iter >= inj.end_iter || inj.end_iter > self.horizon {
                return Err(Error::InvalidScenario(format!(
                    "injection {i}: interval [{}, {}) invalid for horizon {}",
                    inj.start_iter, inj.end_iter, self.horizon
                )));
            }
            match inj.target {
                InjectionTarget::Gpu(g) => {
                    if g >= self.topo.total_gpus() {
                        return Err(Error::InvalidScenario(format!(
                            "injection {i}: unknown gpu {g}"
                        )));
                    }
                }
                InjectionTarget::Link(l) => {
                    if !self.topo.links.iter().any(|x| x.id == l) {
                        return Err(Error::InvalidScenario(format!(
                            "injection {i}: unknown link {l}"
                        )));
                    }
                }
            }
        }
        // Every node pair used by the initial placement must have a link.
        let placement = &self.topo.placement;
        for s in 0..self.topo.pp_size {
            for d in 0..self.topo.dp_size {
                if s + 1 < self.topo.pp_size {
                    let a = self.topo.node_of_group(placement, d, s);
                    let b = self.topo.node_of_group(placement, d, s + 1);
                    if self.topo.link_bandwidth(a, b).is_none() {
                        return Err(Error::InvalidScenario(format!(
                            "no link between nodes {a} and {b} for the pp edge (dp {d}, stage {s})"
                        )));
                    }
                }
                let a = self.topo.node_of_group(placement, d, s);
                let b = self
                    .topo
                    .node_of_group(placement, (d + 1) % self.topo.dp_size, s);
                if self.topo.dp_size > 1 && self.topo.link_bandwidth(a, b).is_none() {
                    return Err(Error::InvalidScenario(format!(
                        "no link between nodes {a} and {b} for the dp ring at stage {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The scenario with its injection schedule removed.
    pub fn healthy_clone(&self) -> Self {
        let mut s = self.clone();
        s.injections.clear();
        s
    }
}
