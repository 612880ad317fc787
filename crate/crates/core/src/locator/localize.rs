use std::collections::BTreeMap;

use crate::locator::profile::{median, SUSPICIOUS_FACTOR};
use crate::model::{ComponentId, GpuId, LinkId};

/// Benchmark measurements gathered from the suspicious groups: matrix-math
/// test times per GPU and P2P transfer times per link.
#[derive(Debug, Clone, Default)]
pub struct BenchmarkResults {
    pub compute: BTreeMap<GpuId, f64>,
    pub links: BTreeMap<LinkId, f64>,
}

/// Healthy reference times used when a component has no peers to compare
/// against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HealthyBaselines {
    pub compute_time: f64,
    pub link_time: f64,
}

/// Flags GPUs and links whose benchmark time exceeds 1.1x the median of
/// their peer class; a singleton peer set falls back to 1.1x the
/// configured healthy baseline.
pub fn localize(results: &BenchmarkResults, baselines: HealthyBaselines) -> Vec<ComponentId> {
    let mut located = Vec::new();
    located.extend(
        flag(&results.compute, baselines.compute_time)
            .into_iter()
            .map(ComponentId::Gpu),
    );
    located.extend(
        flag(&results.links, baselines.link_time)
            .into_iter()
            .map(ComponentId::Link),
    );
    located
}

fn flag<K: Copy + Ord>(times: &BTreeMap<K, f64>, baseline: f64) -> Vec<K> {
    if times.is_empty() {
        return Vec::new();
    }
    let cutoff = if times.len() == 1 {
        SUSPICIOUS_FACTOR * baseline
    } else {
        SUSPICIOUS_FACTOR * median(times.values().copied())
    };
    times
        .iter()
        .filter(|(_, &t)| t > cutoff)
        .map(|(&k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baselines() -> HealthyBaselines {
        HealthyBaselines {
            compute_time: 1.0,
            link_time: 1.0,
        }
    }

    #[test]
    fn slow_link_is_flagged() {
        let mut results = BenchmarkResults::default();
        for (i, t) in [1.0, 1.0, 1.0, 2.0].into_iter().enumerate() {
            results.links.insert(LinkId::new(i, i + 1), t);
        }
        let located = localize(&results, baselines());
        assert_eq!(located, vec![ComponentId::Link(LinkId::new(3, 4))]);
    }

    #[test]
    fn equal_gpus_are_healthy() {
        let mut results = BenchmarkResults::default();
        for g in 0..4 {
            results.compute.insert(g, 0.7);
        }
        assert!(localize(&results, baselines()).is_empty());
    }

    #[test]
    fn singleton_compares_to_baseline() {
        let mut results = BenchmarkResults::default();
        results.compute.insert(7, 1.4);
        let located = localize(&results, baselines());
        assert_eq!(located, vec![ComponentId::Gpu(7)]);

        let mut healthy = BenchmarkResults::default();
        healthy.compute.insert(7, 1.05);
        assert!(localize(&healthy, baselines()).is_empty());
    }
}
