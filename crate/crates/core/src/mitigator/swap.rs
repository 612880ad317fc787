use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{CommVolumes, LinkId, NodeId, ParallelTopology, Placement};

/// Effective (possibly congested) bandwidth lookup for the swap search.
#[derive(Debug, Clone)]
pub struct LinkBandwidths {
    pub inter: BTreeMap<LinkId, f64>,
    pub intra: f64,
}

impl LinkBandwidths {
    /// Healthy bandwidths straight from the topology's link inventory.
    pub fn healthy(topo: &ParallelTopology) -> Self {
        Self {
            inter: topo.links.iter().map(|l| (l.id, l.bandwidth)).collect(),
            intra: topo.intra_node_bandwidth,
        }
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> Option<f64> {
        if a == b {
            Some(self.intra)
        } else {
            self.inter.get(&LinkId::new(a, b)).copied()
        }
    }
}

/// Bottleneck-first congestion measure: worst per-link transfer time, with
/// total transfer time as the tie-break.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Congestion {
    pub bottleneck: f64,
    pub total: f64,
}

impl Congestion {
    fn better_than(&self, other: &Congestion) -> bool {
        match self.bottleneck.total_cmp(&other.bottleneck) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.total < other.total - 1e-12,
        }
    }
}

/// How the permutation space is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapSearch {
    /// Steepest-descent over pairwise node swaps.
    HillClimb,
    /// All node permutations; only for small clusters.
    Exhaustive,
}

/// A node relabeling: ranks hosted on node `n` move to `node_map[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapPlan {
    pub node_map: BTreeMap<NodeId, NodeId>,
    /// False when no relabeling beats the current assignment.
    pub improved: bool,
    pub before: Congestion,
    pub after: Congestion,
}

impl SwapPlan {
    pub fn apply(&self, placement: &Placement) -> Placement {
        placement
            .iter()
            .map(|slot| crate::model::GpuSlot {
                node: self.node_map[&slot.node],
                slot: slot.slot,
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.node_map.iter().all(|(a, b)| a == b)
    }
}

/// Inter-node traffic implied by the DP rings and PP stage edges under the
/// given placement, keyed by the node pair that currently carries it.
pub fn logical_traffic(
    topo: &ParallelTopology,
    placement: &Placement,
    volumes: &CommVolumes,
) -> BTreeMap<(NodeId, NodeId), f64> {
    let mut traffic: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    let mut add = |a: NodeId, b: NodeId, vol: f64| {
        if a != b && vol > 0.0 {
            let key = (a.min(b), a.max(b));
            *traffic.entry(key).or_insert(0.0) += vol;
        }
    };
    let d_count = topo.dp_size;
    for s in 0..topo.pp_size {
        if d_count >= 2 {
            let nodes: Vec<NodeId> = (0..d_count)
                .map(|d| topo.node_of_group(placement, d, s))
                .collect();
            if d_count == 2 {
                add(nodes[0], nodes[1], volumes.dp_bytes);
            } else {
                for d in 0..d_count {
                    add(nodes[d], nodes[(d + 1) % d_count], volumes.dp_bytes);
                }
            }
        }
        if s + 1 < topo.pp_size {
            for d in 0..d_count {
                add(
                    topo.node_of_group(placement, d, s),
                    topo.node_of_group(placement, d, s + 1),
                    volumes.pp_bytes,
                );
            }
        }
    }
    traffic
}

fn evaluate(
    traffic: &BTreeMap<(NodeId, NodeId), f64>,
    perm: &[NodeId],
    bandwidths: &LinkBandwidths,
) -> Option<Congestion> {
    let mut bottleneck: f64 = 0.0;
    let mut total = 0.0;
    for (&(u, v), &vol) in traffic {
        let bw = bandwidths.get(perm[u], perm[v])?;
        if bw <= 0.0 {
            return None;
        }
        let t = vol / bw;
        bottleneck = bottleneck.max(t);
        total += t;
    }
    Some(Congestion { bottleneck, total })
}

/// Searches for a node relabeling that minimizes the bottleneck transfer
/// time of the implied traffic over the effective bandwidths. Returns an
/// identity plan flagged `improved: false` when the congested set is empty
/// or no relabeling helps.
pub fn plan_topology_swap(
    topo: &ParallelTopology,
    placement: &Placement,
    volumes: &CommVolumes,
    congested: &[LinkId],
    bandwidths: &LinkBandwidths,
    mode: SwapSearch,
) -> Result<SwapPlan> {
    let node_count = topo.nodes.len();
    for &n in &topo.nodes {
        if n >= node_count {
            return Err(Error::InvalidTopology(
                "swap search expects contiguous node ids".into(),
            ));
        }
    }
    let traffic = logical_traffic(topo, placement, volumes);
    let identity: Vec<NodeId> = (0..node_count).collect();
    let base = evaluate(&traffic, &identity, bandwidths).ok_or_else(|| {
        Error::InvalidScenario("current placement uses a node pair with no link".into())
    })?;

    let noop = |base: Congestion| SwapPlan {
        node_map: identity.iter().map(|&n| (n, n)).collect(),
        improved: false,
        before: base,
        after: base,
    };
    if congested.is_empty() {
        return Ok(noop(base));
    }

    let best_perm = match mode {
        SwapSearch::HillClimb => {
            let mut perm = identity.clone();
            let mut current = base;
            loop {
                let mut best: Option<(Congestion, usize, usize)> = None;
                for i in 0..node_count {
                    for j in (i + 1)..node_count {
                        perm.swap(i, j);
                        if let Some(c) = evaluate(&traffic, &perm, bandwidths) {
                            let beats = match &best {
                                Some((b, _, _)) => c.better_than(b),
                                None => c.better_than(&current),
                            };
                            if beats {
                                best = Some((c, i, j));
                            }
                        }
                        perm.swap(i, j);
                    }
                }
                match best {
                    Some((c, i, j)) => {
                        perm.swap(i, j);
                        current = c;
                    }
                    None => break,
                }
            }
            perm
        }
        SwapSearch::Exhaustive => {
            if node_count > 8 {
                return Err(Error::InvalidArgument(format!(
                    "exhaustive swap search is limited to 8 nodes, got {node_count}"
                )));
            }
            let mut best_perm = identity.clone();
            let mut best = base;
            let mut perm = identity.clone();
            permute(&mut perm, 0, &mut |p| {
                if let Some(c) = evaluate(&traffic, p, bandwidths) {
                    if c.better_than(&best) {
                        best = c;
                        best_perm = p.to_vec();
                    }
                }
            });
            best_perm
        }
    };

    let after = evaluate(&traffic, &best_perm, bandwidths).expect("accepted perms are feasible");
    if !after.better_than(&base) {
        return Ok(noop(base));
    }
    Ok(SwapPlan {
        node_map: best_perm.iter().enumerate().map(|(i, &n)| (i, n)).collect(),
        improved: true,
        before: base,
        after,
    })
}

fn permute(perm: &mut Vec<NodeId>, k: usize, visit: &mut impl FnMut(&[NodeId])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{comm_volumes, TrafficModel};
    use proptest::prelude::*;

    /// Two replicas of two stages on four single-GPU nodes; heavy DP, light
    /// PP, and one congested inter-node link.
    fn fixture() -> (ParallelTopology, CommVolumes) {
        let links = ParallelTopology::full_mesh_links(4, 1e9);
        let topo = ParallelTopology::canonical(1, 2, 2, 1, links, 1e12).unwrap();
        let volumes = CommVolumes {
            tp_bytes: 0.0,
            dp_bytes: 1e9,
            pp_bytes: 1e7,
        };
        (topo, volumes)
    }

    fn congest(topo: &ParallelTopology, link: LinkId, factor: f64) -> LinkBandwidths {
        let mut bw = LinkBandwidths::healthy(topo);
        let b = bw.inter.get_mut(&link).unwrap();
        *b *= factor;
        bw
    }

    #[test]
    fn congested_dp_link_is_traded_for_pp_traffic() {
        let (topo, volumes) = fixture();
        // Ranks: 0=(d0,p0) node0, 1=(d1,p0) node1, 2=(d0,p1) node2,
        // 3=(d1,p1) node3. DP rings: (0,1) and (2,3); PP: (0,2), (1,3).
        let congested = LinkId::new(0, 1);
        let bw = congest(&topo, congested, 0.1);
        let plan = plan_topology_swap(
            &topo,
            &topo.placement,
            &volumes,
            &[congested],
            &bw,
            SwapSearch::HillClimb,
        )
        .unwrap();
        assert!(plan.improved);
        assert!(plan.after.bottleneck < plan.before.bottleneck);
        // The congested wire is relieved of DP traffic: it now carries at
        // most the light PP volume.
        let traffic = logical_traffic(&topo, &plan.apply(&topo.placement), &volumes);
        let carried = traffic.get(&(0, 1)).copied().unwrap_or(0.0);
        assert!(carried <= volumes.pp_bytes);
    }

    #[test]
    fn no_congested_links_means_identity() {
        let (topo, volumes) = fixture();
        let bw = LinkBandwidths::healthy(&topo);
        let plan = plan_topology_swap(
            &topo,
            &topo.placement,
            &volumes,
            &[],
            &bw,
            SwapSearch::HillClimb,
        )
        .unwrap();
        assert!(!plan.improved);
        assert!(plan.is_identity());
    }

    #[test]
    fn hill_climb_matches_exhaustive_on_four_nodes() {
        let (topo, volumes) = fixture();
        let congested = LinkId::new(0, 1);
        let bw = congest(&topo, congested, 0.05);
        let hill = plan_topology_swap(
            &topo,
            &topo.placement,
            &volumes,
            &[congested],
            &bw,
            SwapSearch::HillClimb,
        )
        .unwrap();
        let exact = plan_topology_swap(
            &topo,
            &topo.placement,
            &volumes,
            &[congested],
            &bw,
            SwapSearch::Exhaustive,
        )
        .unwrap();
        assert!((hill.after.bottleneck - exact.after.bottleneck).abs() < 1e-12);
    }

    #[test]
    fn traffic_uses_real_model_volumes() {
        let (topo, _) = fixture();
        let model = TrafficModel {
            layers: 8,
            hidden: 512,
            heads: 8,
            head_dim: 64,
            vocab: 32000,
            context: 512,
            micro_batch: 1,
            num_micro_batches: 8,
            grad_bytes_factor: 2.0,
            element_bytes: 2,
        };
        let volumes = comm_volumes(&model, &topo);
        let traffic = logical_traffic(&topo, &topo.placement, &volumes);
        assert_eq!(traffic[&(0, 1)], volumes.dp_bytes);
        assert_eq!(traffic[&(0, 2)], volumes.pp_bytes);
    }

    proptest! {
        // The planner never returns a plan that worsens the bottleneck.
        #[test]
        fn swap_never_increases_congestion(
            factor in 0.01f64..1.0,
            link_a in 0usize..4,
            link_b in 0usize..4,
            dp_scale in 1.0f64..200.0,
        ) {
            prop_assume!(link_a != link_b);
            let (topo, mut volumes) = fixture();
            volumes.dp_bytes = volumes.pp_bytes * dp_scale;
            let congested = LinkId::new(link_a, link_b);
            let bw = congest(&topo, congested, factor);
            for mode in [SwapSearch::HillClimb, SwapSearch::Exhaustive] {
                let plan = plan_topology_swap(
                    &topo,
                    &topo.placement,
                    &volumes,
                    &[congested],
                    &bw,
                    mode,
                )
                .unwrap();
                prop_assert!(plan.after.bottleneck <= plan.before.bottleneck + 1e-12);
            }
        }
    }
}
