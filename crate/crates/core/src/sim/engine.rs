use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::locator::{BenchmarkResults, GroupProfile, HealthyBaselines};
use crate::model::{comm_volumes, CommVolumes, GpuId, LinkId, NodeId, Placement};
use crate::sim::scenario::{ClusterScenario, InjectionTarget};

/// Live view of the simulated world: the scenario plus everything the
/// mitigation loop can change.
#[derive(Debug, Clone)]
pub struct WorldView<'a> {
    pub scenario: &'a ClusterScenario,
    pub placement: &'a Placement,
    /// Micro-batches per DP replica.
    pub microbatches: &'a [usize],
    /// Injection indices neutralized by checkpoint-restart.
    pub voided_injections: &'a BTreeSet<usize>,
    /// Baseline speed replacements for swapped-in hardware.
    pub speed_overrides: &'a BTreeMap<GpuId, f64>,
}

/// One simulated iteration: the stage-synchronous pipeline time per
/// replica, the DP synchronization tail, and per-group profiles.
#[derive(Debug, Clone)]
pub struct IterationBreakdown {
    pub total_s: f64,
    pub replica_times: Vec<f64>,
    /// Per-replica per-micro-batch bottleneck stage time (max over stages).
    pub per_microbatch_bottleneck: Vec<f64>,
    pub dp_sync_s: f64,
    pub profiles: Vec<GroupProfile>,
    /// Set when some required link has zero effective bandwidth; the link
    /// is treated as crawling rather than failed.
    pub stalled: bool,
}

const STALL_BANDWIDTH_FLOOR: f64 = 1.0;

pub fn effective_speed(view: &WorldView, gpu: GpuId, iter: usize) -> f64 {
    let base = view
        .speed_overrides
        .get(&gpu)
        .or_else(|| view.scenario.gpu_speed.get(&gpu))
        .copied()
        .unwrap_or(1.0);
    let mut speed = base;
    for (i, inj) in view.scenario.injections.iter().enumerate() {
        if view.voided_injections.contains(&i) || !inj.active_at(iter) {
            continue;
        }
        if let InjectionTarget::Gpu(g) = inj.target {
            if g == gpu {
                speed *= inj.factor;
            }
        }
    }
    speed
}

/// Effective bandwidth between two nodes; `None` when no link exists.
pub fn effective_bandwidth(view: &WorldView, a: NodeId, b: NodeId, iter: usize) -> Option<f64> {
    let mut bw = view.scenario.topo.link_bandwidth(a, b)?;
    if a == b {
        return Some(bw);
    }
    let id = LinkId::new(a, b);
    for (i, inj) in view.scenario.injections.iter().enumerate() {
        if view.voided_injections.contains(&i) || !inj.active_at(iter) {
            continue;
        }
        if let InjectionTarget::Link(l) = inj.target {
            if l == id {
                bw *= inj.factor;
            }
        }
    }
    Some(bw)
}

/// Current effective bandwidths for every inventoried link.
pub fn effective_link_bandwidths(
    view: &WorldView,
    iter: usize,
) -> crate::mitigator::LinkBandwidths {
    let inter = view
        .scenario
        .topo
        .links
        .iter()
        .map(|l| {
            let bw = effective_bandwidth(view, l.id.a, l.id.b, iter).unwrap_or(0.0);
            (l.id, bw)
        })
        .collect();
    crate::mitigator::LinkBandwidths {
        inter,
        intra: view.scenario.topo.intra_node_bandwidth,
    }
}

pub fn volumes(view: &WorldView) -> CommVolumes {
    comm_volumes(&view.scenario.model, &view.scenario.topo)
}

/// Stage-synchronous iteration time:
/// `tau_{d,s} = base_compute / min(speed of the stage's GPUs) +
/// per_microbatch_pp_bytes / bandwidth(stage link)`, replica time
/// `(m_d + P - 1) * max_s tau_{d,s}`, plus the DP all-reduce gated by the
/// slowest ring link. Each pipeline slot moves one micro-batch's
/// activations, so the per-slot share is the iteration PP volume divided
/// by the micro-batch count. Also emits per-DP-group transfer/idle
/// profiles.
pub fn iteration_time(view: &WorldView, iter: usize) -> Result<IterationBreakdown> {
    let topo = &view.scenario.topo;
    let vols = volumes(view);
    let p_count = topo.pp_size;
    let d_count = topo.dp_size;
    if view.microbatches.len() != d_count {
        return Err(Error::InvalidArgument(format!(
            "{} micro-batch counts for {} replicas",
            view.microbatches.len(),
            d_count
        )));
    }
    let mut stalled = false;
    let mut bw_or_floor = |a: NodeId, b: NodeId| -> Result<f64> {
        let bw = effective_bandwidth(view, a, b, iter).ok_or_else(|| {
            Error::InvalidScenario(format!("no link between nodes {a} and {b}"))
        })?;
        if bw <= 0.0 {
            stalled = true;
            Ok(STALL_BANDWIDTH_FLOOR)
        } else {
            Ok(bw)
        }
    };

    let pp_slot_bytes = vols.pp_bytes / view.scenario.model.num_micro_batches.max(1) as f64;
    let mut replica_times = Vec::with_capacity(d_count);
    let mut bottlenecks = Vec::with_capacity(d_count);
    for d in 0..d_count {
        let mut worst_stage = 0.0f64;
        for s in 0..p_count {
            let min_speed = topo
                .tp_group(d, s)
                .iter()
                .map(|&r| effective_speed(view, topo.gpu_of_rank(view.placement, r), iter))
                .fold(f64::INFINITY, f64::min);
            let mut tau = view.scenario.base_compute / min_speed;
            if s + 1 < p_count {
                let a = topo.node_of_group(view.placement, d, s);
                let b = topo.node_of_group(view.placement, d, s + 1);
                tau += pp_slot_bytes / bw_or_floor(a, b)?;
            }
            worst_stage = worst_stage.max(tau);
        }
        bottlenecks.push(worst_stage);
        replica_times.push((view.microbatches[d] as f64 + p_count as f64 - 1.0) * worst_stage);
    }

    // DP synchronization: each stage's all-reduce ring is gated by its
    // slowest link; the iteration waits for the slowest group.
    let mut profiles = Vec::new();
    let mut dp_sync = 0.0f64;
    if d_count > 1 {
        let slowest_ready = replica_times.iter().copied().fold(0.0, f64::max);
        let earliest_ready = replica_times.iter().copied().fold(f64::INFINITY, f64::min);
        for s in 0..p_count {
            let nodes: Vec<NodeId> = (0..d_count)
                .map(|d| topo.node_of_group(view.placement, d, s))
                .collect();
            let mut min_bw = f64::INFINITY;
            if d_count == 2 {
                min_bw = bw_or_floor(nodes[0], nodes[1])?;
            } else {
                for d in 0..d_count {
                    min_bw = min_bw.min(bw_or_floor(nodes[d], nodes[(d + 1) % d_count])?);
                }
            }
            let transfer = vols.dp_bytes / min_bw;
            dp_sync = dp_sync.max(transfer);
            for t in 0..topo.tp_size {
                profiles.push(GroupProfile {
                    group: (s * topo.tp_size + t) as u64,
                    transfer_time: transfer,
                    idle_time: slowest_ready - earliest_ready,
                });
            }
        }
    }

    let total = replica_times.iter().copied().fold(0.0, f64::max) + dp_sync;
    Ok(IterationBreakdown {
        total_s: total,
        replica_times,
        per_microbatch_bottleneck: bottlenecks,
        dp_sync_s: dp_sync,
        profiles,
        stalled,
    })
}

/// Validation benchmarks executed by the simulator: a matrix-math probe per
/// GPU (`work / speed`) and a P2P probe per link (`bytes / bandwidth`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkConfig {
    /// Seconds of matrix-math work at speed 1.0.
    pub gemm_work_s: f64,
    /// Probe transfer size in bytes.
    pub probe_bytes: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            gemm_work_s: 1.0,
            probe_bytes: 64.0 * 1024.0 * 1024.0,
        }
    }
}

pub fn run_benchmarks(
    view: &WorldView,
    gpus: &BTreeSet<GpuId>,
    links: &BTreeSet<LinkId>,
    config: &BenchmarkConfig,
    iter: usize,
) -> BenchmarkResults {
    let mut results = BenchmarkResults::default();
    for &gpu in gpus {
        results
            .compute
            .insert(gpu, config.gemm_work_s / effective_speed(view, gpu, iter));
    }
    for &link in links {
        if let Some(bw) = effective_bandwidth(view, link.a, link.b, iter) {
            let bw = if bw <= 0.0 { STALL_BANDWIDTH_FLOOR } else { bw };
            results.links.insert(link, config.probe_bytes / bw);
        }
    }
    results
}

/// Reference times for components with no peers: a healthy GPU and the
/// inventoried healthy bandwidth of each link class (the slowest healthy
/// link keeps singletons comparable).
pub fn healthy_baselines(view: &WorldView, config: &BenchmarkConfig) -> HealthyBaselines {
    let min_healthy_bw = view
        .scenario
        .topo
        .links
        .iter()
        .map(|l| l.bandwidth)
        .fold(f64::INFINITY, f64::min);
    HealthyBaselines {
        compute_time: config.gemm_work_s,
        link_time: config.probe_bytes / min_healthy_bw,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mitigator::MicrobatchPlan;
    use crate::model::{ParallelTopology, TrafficModel};
    use crate::sim::scenario::InjectionEvent;

    pub(crate) fn scenario_4dp_4pp() -> ClusterScenario {
        let links = ParallelTopology::full_mesh_links(16, 1e9);
        let topo = ParallelTopology::canonical(1, 4, 4, 1, links, 1e11).unwrap();
        ClusterScenario {
            topo,
            model: TrafficModel {
                layers: 4,
                hidden: 512,
                heads: 8,
                head_dim: 64,
                vocab: 8192,
                context: 256,
                micro_batch: 1,
                num_micro_batches: 16,
                grad_bytes_factor: 2.0,
                element_bytes: 2,
            },
            gpu_speed: BTreeMap::new(),
            base_compute: 0.05,
            injections: Vec::new(),
            horizon: 100,
            seed: 7,
            jitter_sigma: 0.0,
        }
    }

    fn view<'a>(
        scenario: &'a ClusterScenario,
        placement: &'a Placement,
        microbatches: &'a [usize],
        voided: &'a BTreeSet<usize>,
        overrides: &'a BTreeMap<GpuId, f64>,
    ) -> WorldView<'a> {
        WorldView {
            scenario,
            placement,
            microbatches,
            voided_injections: voided,
            speed_overrides: overrides,
        }
    }

    #[test]
    fn healthy_symmetric_scenario_matches_closed_form() {
        let scenario = scenario_4dp_4pp();
        scenario.validate().unwrap();
        let plan = MicrobatchPlan::even(16, 4).unwrap();
        let (voided, overrides) = (BTreeSet::new(), BTreeMap::new());
        let v = view(&scenario, &scenario.topo.placement, &plan.counts, &voided, &overrides);
        let b = iteration_time(&v, 0).unwrap();

        // Independent closed form: tau = base + per-slot pp share / bw on
        // non-final stages, replica (m + P - 1) * tau, plus dp sync.
        let vols = comm_volumes(&scenario.model, &scenario.topo);
        let tau = 0.05 + vols.pp_bytes / 16.0 / 1e9;
        let expected = (4.0 + 3.0) * tau + vols.dp_bytes / 1e9;
        assert!((b.total_s - expected).abs() < 1e-12, "{} vs {expected}", b.total_s);

        // All replicas tie.
        for r in &b.replica_times {
            assert!((r - b.replica_times[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn half_speed_gpu_doubles_its_stage_bottleneck() {
        let mut scenario = scenario_4dp_4pp();
        // Slow the GPU hosting (dp1, pp2).
        let rank = scenario.topo.rank_of(0, 1, 2);
        let gpu = scenario.topo.gpu_of_rank(&scenario.topo.placement, rank);
        scenario.gpu_speed.insert(gpu, 0.5);
        let plan = MicrobatchPlan::even(16, 4).unwrap();
        let (voided, overrides) = (BTreeSet::new(), BTreeMap::new());
        let v = view(&scenario, &scenario.topo.placement, &plan.counts, &voided, &overrides);
        let b = iteration_time(&v, 0).unwrap();
        let vols = comm_volumes(&scenario.model, &scenario.topo);
        let tau_healthy = 0.05 + vols.pp_bytes / 16.0 / 1e9;
        let tau_slow = 0.05 / 0.5 + vols.pp_bytes / 16.0 / 1e9;
        assert!((b.per_microbatch_bottleneck[1] - tau_slow).abs() < 1e-12);
        assert!((b.per_microbatch_bottleneck[0] - tau_healthy).abs() < 1e-12);
        assert!(b.replica_times[1] > b.replica_times[0]);
    }

    #[test]
    fn slower_resources_never_speed_up_iterations() {
        let scenario = scenario_4dp_4pp();
        let plan = MicrobatchPlan::even(16, 4).unwrap();
        let (voided, overrides) = (BTreeSet::new(), BTreeMap::new());
        let v = view(&scenario, &scenario.topo.placement, &plan.counts, &voided, &overrides);
        let base = iteration_time(&v, 0).unwrap().total_s;

        for gpu in 0..16 {
            let mut slower = scenario.clone();
            slower.gpu_speed.insert(gpu, 0.8);
            let v = view(&slower, &slower.topo.placement, &plan.counts, &voided, &overrides);
            assert!(iteration_time(&v, 0).unwrap().total_s >= base);
        }
        let mut congested = scenario.clone();
        congested.injections.push(InjectionEvent {
            target: InjectionTarget::Link(LinkId::new(0, 1)),
            factor: 0.5,
            start_iter: 0,
            end_iter: 100,
        });
        let v = view(&congested, &congested.topo.placement, &plan.counts, &voided, &overrides);
        assert!(iteration_time(&v, 0).unwrap().total_s >= base);
    }

    #[test]
    fn congested_link_elevates_its_group_transfer_profile() {
        let mut scenario = scenario_4dp_4pp();
        // Stage-0 replicas sit on nodes 0..4; congest one of that ring's
        // links so only group 0 shows prolonged transfer.
        scenario.injections.push(InjectionEvent {
            target: InjectionTarget::Link(LinkId::new(0, 1)),
            factor: 0.2,
            start_iter: 0,
            end_iter: 100,
        });
        let plan = MicrobatchPlan::even(16, 4).unwrap();
        let (voided, overrides) = (BTreeSet::new(), BTreeMap::new());
        let v = view(&scenario, &scenario.topo.placement, &plan.counts, &voided, &overrides);
        let b = iteration_time(&v, 0).unwrap();
        let suspicious = crate::locator::classify_groups(&b.profiles);
        assert_eq!(suspicious, vec![0]);
    }

    #[test]
    fn zero_bandwidth_link_sets_the_stall_flag() {
        let mut scenario = scenario_4dp_4pp();
        for l in &mut scenario.topo.links {
            if l.id == LinkId::new(0, 1) {
                l.bandwidth = 0.0;
            }
        }
        let plan = MicrobatchPlan::even(16, 4).unwrap();
        let (voided, overrides) = (BTreeSet::new(), BTreeMap::new());
        let v = view(&scenario, &scenario.topo.placement, &plan.counts, &voided, &overrides);
        let b = iteration_time(&v, 0).unwrap();
        assert!(b.stalled);
        assert!(b.total_s.is_finite());
    }
}
