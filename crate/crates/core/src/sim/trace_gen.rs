use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::mitigator::MicrobatchPlan;
use crate::model::{comm_volumes, CallTrace, CollectiveKind, CommCall};
use crate::sim::engine::{iteration_time, WorldView};
use crate::sim::scenario::ClusterScenario;

/// Per-rank communication pattern for one iteration, in call order.
fn rank_pattern(scenario: &ClusterScenario, rank: usize) -> Vec<(CollectiveKind, u64, u64)> {
    let topo = &scenario.topo;
    let vols = comm_volumes(&scenario.model, topo);
    let c = topo.coords(rank);
    let d_count = topo.dp_size;
    let p_count = topo.pp_size;
    let tp_group_base = 0u64;
    let dp_group_base = (d_count * p_count) as u64;
    let pp_group_base = dp_group_base + (topo.tp_size * p_count) as u64;

    let mut calls = Vec::new();
    if c.pp > 0 {
        let g = pp_group_base + (c.dp * (p_count - 1) + c.pp - 1) as u64;
        calls.push((CollectiveKind::Recv, g, vols.pp_bytes as u64));
    }
    if topo.tp_size > 1 {
        let g = tp_group_base + (c.dp + d_count * c.pp) as u64;
        let per_layer = (vols.tp_bytes / scenario.model.layers as f64) as u64;
        for _ in 0..scenario.model.layers {
            calls.push((CollectiveKind::AllReduce, g, per_layer));
        }
    }
    if c.pp + 1 < p_count {
        let g = pp_group_base + (c.dp * (p_count - 1) + c.pp) as u64;
        calls.push((CollectiveKind::Send, g, vols.pp_bytes as u64));
    }
    if d_count > 1 {
        let g = dp_group_base + (c.tp + topo.tp_size * c.pp) as u64;
        calls.push((CollectiveKind::AllReduce, g, vols.dp_bytes as u64));
    }
    calls
}

/// Emits per-rank call traces whose anchor spacing reproduces the given
/// iteration times. Each rank repeats a fixed block per iteration (PP
/// receive, TP collectives per layer, PP send, DP all-reduce, as its
/// coordinates require), with optional Gaussian timestamp jitter.
pub fn emit_trace(scenario: &ClusterScenario, iteration_times: &[f64]) -> CallTrace {
    let mut trace = CallTrace::default();
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    for rank in 0..scenario.topo.total_ranks() {
        let pattern = rank_pattern(scenario, rank);
        if pattern.is_empty() {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed ^ (rank as u64).wrapping_mul(0x2545f491_4f6cdd1d));
        let mut start = 0.0f64;
        let mut prev_ts = f64::NEG_INFINITY;
        for &dur in iteration_times {
            for (k, &(kind, group, bytes)) in pattern.iter().enumerate() {
                let mut ts = start + dur * k as f64 / pattern.len() as f64;
                if scenario.jitter_sigma > 0.0 {
                    ts += dur * scenario.jitter_sigma * noise.sample(&mut rng);
                }
                // Timestamps must stay nondecreasing per rank.
                ts = ts.max(prev_ts);
                prev_ts = ts;
                trace.push(CommCall {
                    rank,
                    timestamp: ts,
                    kind,
                    group,
                    bytes,
                });
            }
            start += dur;
        }
    }
    trace
}

/// Iteration times of the scenario without any mitigation state: even
/// micro-batches, original placement.
pub fn static_iteration_times(scenario: &ClusterScenario) -> Result<Vec<f64>> {
    let plan = MicrobatchPlan::even(
        scenario.model.num_micro_batches as usize,
        scenario.topo.dp_size,
    )?;
    let voided = Default::default();
    let overrides = Default::default();
    let view = WorldView {
        scenario,
        placement: &scenario.topo.placement,
        microbatches: &plan.counts,
        voided_injections: &voided,
        speed_overrides: &overrides,
    };
    (0..scenario.horizon)
        .map(|iter| Ok(iteration_time(&view, iter)?.total_s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{detect_failslow, detect_period, iteration_times, DetectorConfig};
    use crate::sim::scenario::{InjectionEvent, InjectionTarget};

    fn scenario() -> ClusterScenario {
        let mut s = crate::sim::engine::tests::scenario_4dp_4pp();
        s.jitter_sigma = 0.0;
        s
    }

    #[test]
    fn one_iteration_emits_one_block_per_rank() {
        let mut s = scenario();
        s.horizon = 1;
        let times = static_iteration_times(&s).unwrap();
        let trace = emit_trace(&s, &times);
        // Interior ranks: recv + send + dp. Edge stages: one pp call less.
        for rank in 0..s.topo.total_ranks() {
            let c = s.topo.coords(rank);
            let expected = 1 + usize::from(c.pp > 0) + usize::from(c.pp + 1 < s.topo.pp_size);
            assert_eq!(trace.calls(rank).len(), expected, "rank {rank}");
        }
    }

    #[test]
    fn detector_round_trips_the_emitted_period() {
        let s = scenario();
        let times = static_iteration_times(&s).unwrap();
        let trace = emit_trace(&s, &times);
        for rank in [0usize, 5, 15] {
            let codes = trace.codes(rank);
            let expected_period = rank_pattern(&s, rank).len();
            let got = detect_period(&codes, 16, 0.95).unwrap();
            assert_eq!(got, Some(expected_period), "rank {rank}");
        }
    }

    #[test]
    fn injected_slowdown_is_recovered_from_the_trace() {
        let mut s = scenario();
        s.horizon = 160;
        let rank = s.topo.rank_of(0, 1, 2);
        let gpu = s.topo.gpu_of_rank(&s.topo.placement, rank);
        s.injections.push(InjectionEvent {
            target: InjectionTarget::Gpu(gpu),
            factor: 0.5,
            start_iter: 50,
            end_iter: 80,
        });
        let times = static_iteration_times(&s).unwrap();
        let trace = emit_trace(&s, &times);

        let codes = trace.codes(0);
        let period = detect_period(&codes, 16, 0.95).unwrap().unwrap();
        let inferred = iteration_times(0, trace.calls(0), period).unwrap();
        let series = inferred.main_segment().unwrap();
        assert_eq!(series.len(), s.horizon - 1);

        // Durations over the injected interval match the simulated times.
        for i in 52..78 {
            assert!((series.durations[i] - times[i]).abs() < 1e-9);
            assert!(series.durations[i] > times[10] * 1.2);
        }

        let events = detect_failslow(series, &DetectorConfig::default());
        assert_eq!(events.len(), 1);
        let ev = &events[0];
        assert!(ev.onset_iter.abs_diff(50) <= 5);
        assert!(ev.recovery_iter.unwrap().abs_diff(80) <= 5);
    }
}
