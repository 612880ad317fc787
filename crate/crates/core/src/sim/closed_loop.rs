use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::detector::{verify_changepoint, BocdState, ChangeDirection, DetectorConfig, Verification};
use crate::error::Result;
use crate::locator::{classify_groups, localize};
use crate::mitigator::{
    consolidate_stragglers, plan_topology_swap, solve_microbatch, MicrobatchPlan, MitigationState,
    OverheadConfig, StrategyId, StrategyOverheads, SwapSearch,
};
use crate::model::{ComponentId, FailSlowEvent, FailSlowKind, GpuId, LinkId, Placement};
use crate::sim::engine::{
    effective_link_bandwidths, healthy_baselines, iteration_time, run_benchmarks, volumes,
    BenchmarkConfig, IterationBreakdown, WorldView,
};
use crate::sim::scenario::ClusterScenario;

/// Which ladder rungs beyond S1 the planner may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderToggles {
    pub s2: bool,
    pub s3: bool,
    pub s4: bool,
}

impl Default for LadderToggles {
    fn default() -> Self {
        Self {
            s2: true,
            s3: true,
            s4: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitigationConfig {
    pub enabled: bool,
    pub toggles: LadderToggles,
    pub overheads: OverheadConfig,
    /// Explicit per-strategy overheads; when unset they derive from the
    /// model and overhead knobs.
    pub explicit_overheads: Option<StrategyOverheads>,
    pub min_improvement: f64,
    /// Relative excess below which impact does not accrue.
    pub impact_noise_band: f64,
    pub benchmarks: BenchmarkConfig,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            toggles: LadderToggles::default(),
            overheads: OverheadConfig::default(),
            explicit_overheads: None,
            min_improvement: crate::mitigator::DEFAULT_MIN_IMPROVEMENT,
            impact_noise_band: crate::mitigator::DEFAULT_IMPACT_NOISE_BAND,
            benchmarks: BenchmarkConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoopConfig {
    pub detector: DetectorConfig,
    pub mitigation: MitigationConfig,
}

/// One timeline line: `{iter, time_s, active_events, active_strategy}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub time_s: f64,
    pub active_events: Vec<usize>,
    pub active_strategy: Option<StrategyId>,
}

#[derive(Debug, Clone)]
pub struct EventRecord {
    pub id: usize,
    pub event: FailSlowEvent,
}

#[derive(Debug, Clone)]
pub struct ActionRecord {
    pub iter: usize,
    pub event_id: usize,
    pub strategy: StrategyId,
    pub accumulated_impact: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub iterations: Vec<IterRecord>,
    pub events: Vec<EventRecord>,
    pub actions: Vec<ActionRecord>,
    pub total_time_s: f64,
    pub throughput_iters_per_s: f64,
}

struct LiveEvent {
    id: usize,
    located: Vec<ComponentId>,
    planner: MitigationState,
    open: bool,
    last_applied: Option<StrategyId>,
}

struct LoopState {
    placement: Placement,
    microbatches: Vec<usize>,
    pending_plan: Option<Vec<usize>>,
    voided: BTreeSet<usize>,
    overrides: BTreeMap<GpuId, f64>,
    pending_one_off: f64,
    live: Vec<LiveEvent>,
    records: Vec<EventRecord>,
    actions: Vec<ActionRecord>,
}

/// Simulates the scenario with the detector in the loop; when mitigation
/// is enabled, located events drive the multi-level planner and its
/// actions are applied to the live world (plans next iteration, placement
/// changes after a pause, restarts voiding injections).
pub fn run_closed_loop(scenario: &ClusterScenario, config: &LoopConfig) -> Result<RunReport> {
    scenario.validate()?;
    let total_micro = scenario.model.num_micro_batches as usize;
    let mut st = LoopState {
        placement: scenario.topo.placement.clone(),
        microbatches: MicrobatchPlan::even(total_micro, scenario.topo.dp_size)?.counts,
        pending_plan: None,
        voided: BTreeSet::new(),
        overrides: BTreeMap::new(),
        pending_one_off: 0.0,
        live: Vec::new(),
        records: Vec::new(),
        actions: Vec::new(),
    };
    let mut bocd = BocdState::new(config.detector.bocd);
    let mut durations: Vec<f64> = Vec::with_capacity(scenario.horizon);
    let mut iterations = Vec::with_capacity(scenario.horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed.wrapping_mul(0x9e3779b97f4a7c15));
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut total_time = 0.0f64;

    for iter in 0..scenario.horizon {
        if let Some(plan) = st.pending_plan.take() {
            st.microbatches = plan;
        }
        let breakdown = {
            let view = WorldView {
                scenario,
                placement: &st.placement,
                microbatches: &st.microbatches,
                voided_injections: &st.voided,
                speed_overrides: &st.overrides,
            };
            iteration_time(&view, iter)?
        };
        let jitter = if scenario.jitter_sigma > 0.0 {
            (1.0 + scenario.jitter_sigma * noise.sample(&mut rng)).max(0.01)
        } else {
            1.0
        };
        // Steady time feeds detection and planning; the recorded time adds
        // one-off action costs (pauses, restarts) booked by the planner.
        let t_steady = breakdown.total_s * jitter;
        let t_recorded = t_steady + st.pending_one_off;
        st.pending_one_off = 0.0;
        durations.push(t_steady);
        total_time += t_recorded;

        let p0 = bocd.update(t_steady);
        if iter >= config.detector.burn_in && p0 >= config.detector.bocd.threshold {
            match verify_changepoint(
                &durations,
                iter,
                config.detector.verify_window,
                config.detector.verify_margin,
            ) {
                Verification::Verified(cp) if cp.direction == ChangeDirection::Degrade => {
                    open_events(scenario, config, &mut st, iter, &breakdown, cp.mean_before, cp.mean_after)?;
                }
                // Any other change-point signal (verified recovery, or a
                // sub-margin shift left by an effective mitigation): let
                // the component benchmarks decide whether open events are
                // really over.
                _ => {
                    recheck_open_events(scenario, config, &mut st, iter, &breakdown)?;
                }
            }
        }

        if config.mitigation.enabled {
            step_planners(scenario, &mut st, iter, &breakdown, t_steady)?;
        }

        let active_events: Vec<usize> = st.live.iter().filter(|e| e.open).map(|e| e.id).collect();
        let active_strategy = st
            .live
            .iter()
            .filter(|e| e.open)
            .filter_map(|e| e.last_applied)
            .max();
        iterations.push(IterRecord {
            iter,
            time_s: t_recorded,
            active_events,
            active_strategy,
        });
    }

    for ev in &st.live {
        let record = &mut st.records[ev.id];
        record.event = ev.planner.event.clone();
    }
    Ok(RunReport {
        iterations,
        events: st.records,
        actions: st.actions,
        total_time_s: total_time,
        throughput_iters_per_s: scenario.horizon as f64 / total_time,
    })
}

/// All GPUs and ring links of the given DP communication groups
/// (`group = stage * tp_size + tp`).
fn group_components(
    scenario: &ClusterScenario,
    placement: &Placement,
    groups: &[u64],
) -> (BTreeSet<GpuId>, BTreeSet<LinkId>) {
    let topo = &scenario.topo;
    let mut gpus = BTreeSet::new();
    let mut links = BTreeSet::new();
    for &g in groups {
        let s = g as usize / topo.tp_size;
        let t = g as usize % topo.tp_size;
        let d_count = topo.dp_size;
        for d in 0..d_count {
            gpus.insert(topo.gpu_of_rank(placement, topo.rank_of(t, d, s)));
            let a = topo.node_of_group(placement, d, s);
            let b = topo.node_of_group(placement, (d + 1) % d_count, s);
            if a != b {
                links.insert(LinkId::new(a, b));
            }
        }
    }
    (gpus, links)
}

fn all_components(scenario: &ClusterScenario) -> (BTreeSet<GpuId>, BTreeSet<LinkId>) {
    let gpus = (0..scenario.topo.total_gpus()).collect();
    let links = scenario.topo.links.iter().map(|l| l.id).collect();
    (gpus, links)
}

#[allow(clippy::too_many_arguments)]
fn open_events(
    scenario: &ClusterScenario,
    config: &LoopConfig,
    st: &mut LoopState,
    iter: usize,
    breakdown: &IterationBreakdown,
    mean_before: f64,
    mean_after: f64,
) -> Result<()> {
    let view = WorldView {
        scenario,
        placement: &st.placement,
        microbatches: &st.microbatches,
        voided_injections: &st.voided,
        speed_overrides: &st.overrides,
    };
    let bench_cfg = &config.mitigation.benchmarks;
    let baselines = healthy_baselines(&view, bench_cfg);

    // Narrow the search with profiling; fall back to a full sweep when no
    // group shows prolonged transfer (compute stragglers stall every group
    // equally, so transfer looks uniform).
    let suspicious = classify_groups(&breakdown.profiles);
    let (gpus, links) = if suspicious.is_empty() {
        all_components(scenario)
    } else {
        group_components(scenario, &st.placement, &suspicious)
    };
    let mut located = localize(
        &run_benchmarks(&view, &gpus, &links, bench_cfg, iter),
        baselines,
    );

    let known: BTreeSet<ComponentId> = st
        .live
        .iter()
        .filter(|e| e.open)
        .flat_map(|e| e.located.iter().copied())
        .collect();
    located.retain(|c| !known.contains(c));
    if located.is_empty() && !suspicious.is_empty() {
        // The narrow sweep found nothing new; widen once.
        let (gpus, links) = all_components(scenario);
        located = localize(
            &run_benchmarks(&view, &gpus, &links, bench_cfg, iter),
            baselines,
        );
        located.retain(|c| !known.contains(c));
    }

    let severity = (mean_after / mean_before).max(1.0);
    let gpus_hit: Vec<ComponentId> = located
        .iter()
        .copied()
        .filter(|c| matches!(c, ComponentId::Gpu(_)))
        .collect();
    let links_hit: Vec<ComponentId> = located
        .iter()
        .copied()
        .filter(|c| matches!(c, ComponentId::Link(_)))
        .collect();

    let mut new_events: Vec<(FailSlowKind, Vec<ComponentId>)> = Vec::new();
    if !gpus_hit.is_empty() {
        new_events.push((FailSlowKind::Computation, gpus_hit));
    }
    if !links_hit.is_empty() {
        new_events.push((FailSlowKind::Communication, links_hit));
    }
    if new_events.is_empty() {
        if st.live.iter().any(|e| e.open) {
            // A known fault re-fired the detector; nothing new to track.
            return Ok(());
        }
        new_events.push((FailSlowKind::Unknown, Vec::new()));
    }

    for (kind, components) in new_events {
        let id = st.records.len();
        let mut event = FailSlowEvent::open(iter, severity);
        event.kind = kind;
        event.located = if components.is_empty() {
            None
        } else {
            Some(components.clone())
        };
        let overheads = config.mitigation.explicit_overheads.unwrap_or_else(|| {
            crate::mitigator::strategy_overheads(
                &scenario.model,
                scenario.topo.dp_size,
                &config.mitigation.overheads,
            )
        });
        let toggles = config.mitigation.toggles;
        let candidates: Vec<_> = overheads
            .candidates(kind)
            .into_iter()
            .filter(|s| match s.id {
                StrategyId::S1 => true,
                StrategyId::S2 => toggles.s2,
                StrategyId::S3 => toggles.s3,
                StrategyId::S4 => toggles.s4,
            })
            .collect();
        let planner = MitigationState::new(event.clone(), candidates, mean_before)
            .with_min_improvement(config.mitigation.min_improvement)
            .with_noise_band(config.mitigation.impact_noise_band);
        st.records.push(EventRecord { id, event });
        st.live.push(LiveEvent {
            id,
            located: components,
            planner,
            open: true,
            last_applied: None,
        });
    }
    Ok(())
}

/// On a verified recovery, close every open event whose located components
/// now benchmark healthy (or that were never located). Closing an event
/// that rebalanced micro-batches re-solves the distribution with the
/// recovered per-group times, so the skew does not outlive the fault.
fn recheck_open_events(
    scenario: &ClusterScenario,
    config: &LoopConfig,
    st: &mut LoopState,
    iter: usize,
    breakdown: &IterationBreakdown,
) -> Result<()> {
    let view = WorldView {
        scenario,
        placement: &st.placement,
        microbatches: &st.microbatches,
        voided_injections: &st.voided,
        speed_overrides: &st.overrides,
    };
    let bench_cfg = &config.mitigation.benchmarks;
    let baselines = healthy_baselines(&view, bench_cfg);
    let mut closed_with_s2 = Vec::new();
    for ev in st.live.iter_mut().filter(|e| e.open) {
        let still_slow = if ev.located.is_empty() {
            false
        } else {
            let mut gpus = BTreeSet::new();
            let mut links = BTreeSet::new();
            for c in &ev.located {
                match c {
                    ComponentId::Gpu(g) => {
                        gpus.insert(*g);
                    }
                    ComponentId::Link(l) => {
                        links.insert(*l);
                    }
                }
            }
            let flagged = localize(
                &run_benchmarks(&view, &gpus, &links, bench_cfg, iter),
                baselines,
            );
            ev.located.iter().any(|c| flagged.contains(c))
        };
        if !still_slow {
            ev.open = false;
            ev.planner.event.recovery_iter = Some(iter);
            st.records[ev.id].event.recovery_iter = Some(iter);
            if ev.planner.applied.contains(&StrategyId::S2) {
                closed_with_s2.push(ev.id);
            }
        }
    }
    if let Some(&event_id) = closed_with_s2.first() {
        let s2_active_elsewhere = st
            .live
            .iter()
            .any(|e| e.open && e.planner.applied.contains(&StrategyId::S2));
        if !s2_active_elsewhere && config.mitigation.enabled {
            let total_micro = scenario.model.num_micro_batches as usize;
            let plan = solve_microbatch(total_micro, &breakdown.per_microbatch_bottleneck)?;
            let detail = format!("rebalance after recovery {:?}", plan.counts);
            st.pending_plan = Some(plan.counts);
            st.actions.push(ActionRecord {
                iter,
                event_id,
                strategy: StrategyId::S2,
                accumulated_impact: 0.0,
                detail,
            });
        }
    }
    Ok(())
}

fn step_planners(
    scenario: &ClusterScenario,
    st: &mut LoopState,
    iter: usize,
    breakdown: &IterationBreakdown,
    t_steady: f64,
) -> Result<()> {
    let total_micro = scenario.model.num_micro_batches as usize;
    for idx in 0..st.live.len() {
        if !st.live[idx].open {
            continue;
        }
        let Some(strategy) = st.live[idx].planner.step(t_steady) else {
            continue;
        };
        st.live[idx].last_applied = Some(strategy);
        let impact = st.live[idx].planner.accumulated_impact;
        let overheads: BTreeMap<StrategyId, f64> = st.live[idx]
            .planner
            .candidates
            .iter()
            .map(|s| (s.id, s.overhead))
            .collect();
        let kind = st.live[idx].planner.event.kind;
        let located = st.live[idx].located.clone();
        let detail = match strategy {
            StrategyId::S1 => "ignore".to_string(),
            StrategyId::S2 => {
                let plan = solve_microbatch(total_micro, &breakdown.per_microbatch_bottleneck)?;
                let detail = format!("microbatches {:?}", plan.counts);
                st.pending_plan = Some(plan.counts);
                st.pending_one_off += overheads[&StrategyId::S2];
                detail
            }
            StrategyId::S3 => {
                st.pending_one_off += overheads[&StrategyId::S3];
                if kind == FailSlowKind::Communication {
                    let congested: Vec<LinkId> = located
                        .iter()
                        .filter_map(|c| match c {
                            ComponentId::Link(l) => Some(*l),
                            _ => None,
                        })
                        .collect();
                    let view = WorldView {
                        scenario,
                        placement: &st.placement,
                        microbatches: &st.microbatches,
                        voided_injections: &st.voided,
                        speed_overrides: &st.overrides,
                    };
                    let bw = effective_link_bandwidths(&view, iter);
                    let vols = volumes(&view);
                    let plan = plan_topology_swap(
                        &scenario.topo,
                        &st.placement,
                        &vols,
                        &congested,
                        &bw,
                        SwapSearch::HillClimb,
                    )?;
                    if plan.improved {
                        st.placement = plan.apply(&st.placement);
                        format!("swap {:?}", plan.node_map)
                    } else {
                        "swap no-op".to_string()
                    }
                } else {
                    let stragglers: Vec<GpuId> = located
                        .iter()
                        .filter_map(|c| match c {
                            ComponentId::Gpu(g) => Some(*g),
                            _ => None,
                        })
                        .collect();
                    if stragglers.is_empty() {
                        "consolidation no-op".to_string()
                    } else {
                        st.placement =
                            consolidate_stragglers(&stragglers, &scenario.topo, &st.placement)?;
                        format!("consolidate {stragglers:?}")
                    }
                }
            }
            StrategyId::S4 => {
                st.pending_one_off += overheads[&StrategyId::S4];
                if located.is_empty() {
                    // Unattributed restart: replace everything suspect.
                    for i in 0..scenario.injections.len() {
                        st.voided.insert(i);
                    }
                    "restart (all injections voided)".to_string()
                } else {
                    for (i, inj) in scenario.injections.iter().enumerate() {
                        let hits = located.iter().any(|c| match (c, inj.target) {
                            (
                                ComponentId::Gpu(g),
                                crate::sim::scenario::InjectionTarget::Gpu(t),
                            ) => *g == t,
                            (
                                ComponentId::Link(l),
                                crate::sim::scenario::InjectionTarget::Link(t),
                            ) => *l == t,
                            _ => false,
                        });
                        if hits {
                            st.voided.insert(i);
                        }
                    }
                    for c in &located {
                        if let ComponentId::Gpu(g) = c {
                            st.overrides.insert(*g, 1.0);
                        }
                    }
                    format!("restart replacing {located:?}")
                }
            }
        };
        st.actions.push(ActionRecord {
            iter,
            event_id: st.live[idx].id,
            strategy,
            accumulated_impact: impact,
            detail,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::{InjectionEvent, InjectionTarget};

    fn base_scenario() -> ClusterScenario {
        let mut s = crate::sim::engine::tests::scenario_4dp_4pp();
        s.horizon = 200;
        s.jitter_sigma = 0.0;
        s
    }

    #[test]
    fn no_injections_means_zero_interference() {
        let s = base_scenario();
        let on = run_closed_loop(
            &s,
            &LoopConfig {
                mitigation: MitigationConfig {
                    enabled: true,
                    ..Default::default()
                },
                ..Default::default()
            },
        )
        .unwrap();
        let off = run_closed_loop(
            &s,
            &LoopConfig {
                mitigation: MitigationConfig {
                    enabled: false,
                    ..Default::default()
                },
                ..Default::default()
            },
        )
        .unwrap();
        assert!(on.events.is_empty());
        assert!(on.actions.is_empty());
        let t_on: Vec<f64> = on.iterations.iter().map(|r| r.time_s).collect();
        let t_off: Vec<f64> = off.iterations.iter().map(|r| r.time_s).collect();
        assert_eq!(t_on, t_off);
    }

    #[test]
    fn computation_straggler_is_located_and_rebalanced() {
        let mut s = base_scenario();
        let gpu = s.topo.gpu_of_rank(&s.topo.placement, s.topo.rank_of(0, 1, 2));
        s.injections.push(InjectionEvent {
            target: InjectionTarget::Gpu(gpu),
            factor: 0.7,
            start_iter: 20,
            end_iter: 200,
        });
        let report = run_closed_loop(&s, &LoopConfig::default()).unwrap();
        assert_eq!(report.events.len(), 1);
        let ev = &report.events[0].event;
        assert_eq!(ev.kind, FailSlowKind::Computation);
        assert_eq!(ev.located, Some(vec![ComponentId::Gpu(gpu)]));
        assert!(ev.onset_iter.abs_diff(20) <= 5);
        let strategies: Vec<StrategyId> =
            report.actions.iter().map(|a| a.strategy).collect();
        assert!(strategies.starts_with(&[StrategyId::S1, StrategyId::S2]));
    }

    #[test]
    fn rebalance_reverts_after_recovery() {
        let mut s = base_scenario();
        let gpu = s.topo.gpu_of_rank(&s.topo.placement, s.topo.rank_of(0, 1, 2));
        s.injections.push(InjectionEvent {
            target: InjectionTarget::Gpu(gpu),
            factor: 0.7,
            start_iter: 20,
            end_iter: 100,
        });
        let report = run_closed_loop(&s, &LoopConfig::default()).unwrap();
        assert_eq!(report.events.len(), 1);
        let recovery = report.events[0].event.recovery_iter.expect("event closes");
        assert!(recovery.abs_diff(100) <= 5, "recovery {recovery}");
        assert!(report
            .actions
            .iter()
            .any(|a| a.detail.contains("rebalance after recovery")));
        // Post-recovery iterations return to the healthy level.
        let healthy = run_closed_loop(&s.healthy_clone(), &LoopConfig::default()).unwrap();
        let tail = |r: &RunReport| {
            r.iterations[150..].iter().map(|x| x.time_s).sum::<f64>() / 50.0
        };
        let drift = (tail(&report) - tail(&healthy)).abs() / tail(&healthy);
        assert!(drift < 0.02, "post-recovery drift {drift}");
    }

    #[test]
    fn compound_faults_get_per_cause_ladders() {
        let mut s = base_scenario();
        s.horizon = 300;
        // Slow wire first, slow GPU later; cheap S3 so the swap fires well
        // before the second fault.
        s.injections.push(InjectionEvent {
            target: InjectionTarget::Link(crate::model::LinkId::new(0, 1)),
            factor: 0.05,
            start_iter: 30,
            end_iter: 300,
        });
        let gpu = s.topo.gpu_of_rank(&s.topo.placement, s.topo.rank_of(0, 2, 1));
        s.injections.push(InjectionEvent {
            target: InjectionTarget::Gpu(gpu),
            factor: 0.7,
            start_iter: 150,
            end_iter: 300,
        });
        let config = LoopConfig {
            mitigation: MitigationConfig {
                explicit_overheads: Some(crate::mitigator::StrategyOverheads {
                    s1: 0.0,
                    s2: 0.01,
                    s3: 2.0,
                    s4: 10_000.0,
                }),
                ..Default::default()
            },
            ..Default::default()
        };
        let report = run_closed_loop(&s, &config).unwrap();

        assert_eq!(report.events.len(), 2, "{:?}", report.events);
        let kinds: Vec<FailSlowKind> = report.events.iter().map(|e| e.event.kind).collect();
        assert_eq!(
            kinds,
            vec![FailSlowKind::Communication, FailSlowKind::Computation]
        );
        let comm_actions: Vec<StrategyId> = report
            .actions
            .iter()
            .filter(|a| a.event_id == 0)
            .map(|a| a.strategy)
            .collect();
        let comp_actions: Vec<StrategyId> = report
            .actions
            .iter()
            .filter(|a| a.event_id == 1)
            .map(|a| a.strategy)
            .collect();
        assert_eq!(comm_actions, vec![StrategyId::S1, StrategyId::S3]);
        assert!(comp_actions.starts_with(&[StrategyId::S1, StrategyId::S2]));
    }

    #[test]
    fn determinism_same_seed_same_report() {
        let mut s = base_scenario();
        s.jitter_sigma = 0.005;
        let gpu = s.topo.gpu_of_rank(&s.topo.placement, s.topo.rank_of(0, 2, 1));
        s.injections.push(InjectionEvent {
            target: InjectionTarget::Gpu(gpu),
            factor: 0.6,
            start_iter: 30,
            end_iter: 150,
        });
        let a = run_closed_loop(&s, &LoopConfig::default()).unwrap();
        let b = run_closed_loop(&s, &LoopConfig::default()).unwrap();
        let ta: Vec<String> = a.iterations.iter().map(|r| format!("{:.9}", r.time_s)).collect();
        let tb: Vec<String> = b.iterations.iter().map(|r| format!("{:.9}", r.time_s)).collect();
        assert_eq!(ta, tb);
        assert_eq!(a.actions.len(), b.actions.len());
    }
}

