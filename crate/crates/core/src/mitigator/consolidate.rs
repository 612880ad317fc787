use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{GpuId, ParallelTopology, Placement};

/// Stage indices ordered by interiority: farthest from the first and last
/// stages first (those endure the extra embedding and head load), ties to
/// the lower stage index.
pub fn interior_stage_order(pp_size: usize) -> Vec<usize> {
    let mut stages: Vec<usize> = (0..pp_size).collect();
    stages.sort_by_key(|&s| (std::cmp::Reverse(s.min(pp_size - 1 - s)), s));
    stages
}

/// Re-places straggling GPUs into the minimal number of interior PP
/// stages. The swap unit is a whole TP group (its ranks share a node), so
/// the placement stays a bijection and TP groups stay node-confined.
/// With one GPU per group the straggler stage count is exactly
/// `ceil(stragglers / gpus_per_stage)`.
pub fn consolidate_stragglers(
    stragglers: &[GpuId],
    topo: &ParallelTopology,
    placement: &Placement,
) -> Result<Placement> {
    let unique: BTreeSet<GpuId> = stragglers.iter().copied().collect();
    if unique.is_empty() {
        return Ok(placement.clone());
    }
    if unique.len() > topo.total_gpus() {
        return Err(Error::InvalidArgument(format!(
            "{} stragglers exceed the {} GPUs in the cluster",
            unique.len(),
            topo.total_gpus()
        )));
    }
    let rank_by_gpu = topo.rank_by_gpu(placement);
    let mut straggling_groups: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &gpu in &unique {
        let &rank = rank_by_gpu.get(&gpu).ok_or_else(|| {
            Error::InvalidArgument(format!("gpu {gpu} does not exist in this topology"))
        })?;
        let c = topo.coords(rank);
        straggling_groups.insert((c.dp, c.pp));
    }

    let d = topo.dp_size;
    let needed_stages = straggling_groups.len().div_ceil(d);
    let current_stages: BTreeSet<usize> =
        straggling_groups.iter().map(|&(_, pp)| pp).collect();
    if current_stages.len() <= needed_stages {
        // Already packed into the minimal stage count; relocating would
        // only pay migration cost.
        return Ok(placement.clone());
    }
    let order = interior_stage_order(topo.pp_size);
    let chosen: BTreeSet<usize> = order.iter().copied().take(needed_stages).collect();

    // Groups already inside chosen stages stay put; the rest swap with
    // healthy groups occupying chosen-stage slots, in interior order.
    let mut free_slots: Vec<(usize, usize)> = Vec::new();
    for &s in order.iter().take(needed_stages) {
        for dp in 0..d {
            if !straggling_groups.contains(&(dp, s)) {
                free_slots.push((dp, s));
            }
        }
    }
    let mut new_placement = placement.clone();
    let mut free = free_slots.into_iter();
    for &(dp, pp) in &straggling_groups {
        if chosen.contains(&pp) {
            continue;
        }
        let (tdp, tpp) = free.next().expect("ceil(groups/d) stages have room");
        for t in 0..topo.tp_size {
            let a = topo.rank_of(t, dp, pp);
            let b = topo.rank_of(t, tdp, tpp);
            new_placement.swap(a, b);
        }
    }
    topo.validate_placement(&new_placement)?;
    Ok(new_placement)
}

/// Stages that currently host at least one of the given GPUs.
pub fn stages_holding(
    gpus: &[GpuId],
    topo: &ParallelTopology,
    placement: &Placement,
) -> BTreeSet<usize> {
    let rank_by_gpu = topo.rank_by_gpu(placement);
    gpus.iter()
        .filter_map(|g| rank_by_gpu.get(g))
        .map(|&r| topo.coords(r).pp)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParallelTopology;

    fn topo(d: usize, p: usize) -> ParallelTopology {
        let nodes = d * p;
        ParallelTopology::canonical(
            1,
            d,
            p,
            1,
            ParallelTopology::full_mesh_links(nodes, 1e9),
            1e11,
        )
        .unwrap()
    }

    #[test]
    fn interior_order_prefers_middle_stages() {
        assert_eq!(interior_stage_order(4), vec![1, 2, 0, 3]);
        assert_eq!(interior_stage_order(5), vec![2, 1, 3, 0, 4]);
        assert_eq!(interior_stage_order(2), vec![0, 1]);
    }

    #[test]
    fn two_stragglers_share_one_interior_stage() {
        // D=2, P=4: two GPUs per stage; two stragglers fit in one stage.
        let t = topo(2, 4);
        // GPUs hosting (dp0, pp0) and (dp1, pp3).
        let g1 = t.gpu_of_rank(&t.placement, t.rank_of(0, 0, 0));
        let g2 = t.gpu_of_rank(&t.placement, t.rank_of(0, 1, 3));
        let new_placement = consolidate_stragglers(&[g1, g2], &t, &t.placement).unwrap();
        let stages = stages_holding(&[g1, g2], &t, &new_placement);
        assert_eq!(stages.len(), 1);
        assert_eq!(stages.into_iter().next(), Some(1));
    }

    #[test]
    fn six_stragglers_need_two_stages_of_four() {
        // D=4, P=4: four GPUs per stage; six stragglers span two stages.
        let t = topo(4, 4);
        let gpus: Vec<usize> = [
            (0usize, 0usize),
            (1, 0),
            (2, 1),
            (3, 2),
            (0, 3),
            (1, 3),
        ]
        .iter()
        .map(|&(dp, pp)| t.gpu_of_rank(&t.placement, t.rank_of(0, dp, pp)))
        .collect();
        let new_placement = consolidate_stragglers(&gpus, &t, &t.placement).unwrap();
        let stages = stages_holding(&gpus, &t, &new_placement);
        assert_eq!(stages.len(), 2);
        assert!(stages.contains(&1) && stages.contains(&2));
    }

    #[test]
    fn empty_straggler_set_is_identity() {
        let t = topo(2, 4);
        let p = consolidate_stragglers(&[], &t, &t.placement).unwrap();
        assert_eq!(p, t.placement);
    }

    #[test]
    fn unknown_gpu_is_invalid() {
        let t = topo(2, 2);
        assert!(consolidate_stragglers(&[99], &t, &t.placement).is_err());
    }

    #[test]
    fn already_minimal_straggler_set_stays_put() {
        // A single straggler occupies one stage already; relocation would
        // only pay migration cost.
        let t = topo(2, 4);
        let g = t.gpu_of_rank(&t.placement, t.rank_of(0, 0, 3));
        let p = consolidate_stragglers(&[g], &t, &t.placement).unwrap();
        assert_eq!(p, t.placement);
    }

    #[test]
    fn placement_stays_a_bijection_with_tensor_parallel_groups() {
        // T=2: groups move as pairs, confinement preserved. Stragglers in
        // two stages with room for one force a relocation.
        let links = ParallelTopology::full_mesh_links(4, 1e9);
        let t = ParallelTopology::canonical(2, 2, 2, 2, links, 1e11).unwrap();
        let g1 = t.gpu_of_rank(&t.placement, t.rank_of(0, 0, 0));
        let g2 = t.gpu_of_rank(&t.placement, t.rank_of(0, 0, 1));
        let new_placement = consolidate_stragglers(&[g1, g2], &t, &t.placement).unwrap();
        assert_ne!(new_placement, t.placement);
        t.validate_placement(&new_placement).unwrap();
        assert_eq!(stages_holding(&[g1, g2], &t, &new_placement).len(), 1);
    }
}
