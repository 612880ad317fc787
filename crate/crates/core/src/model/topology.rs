use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// One training process bound to one GPU.
pub type RankId = usize;
/// Physical host identifier.
pub type NodeId = usize;

/// Flat physical GPU identifier: `node * gpus_per_node + slot`.
pub type GpuId = usize;

/// Undirected inter-node link, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId {
    pub a: NodeId,
    pub b: NodeId,
}

impl LinkId {
    pub fn new(x: NodeId, y: NodeId) -> Self {
        if x <= y {
            Self { a: x, b: y }
        } else {
            Self { a: y, b: x }
        }
    }
}

impl std::fmt::Display for LinkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "link{}-{}", self.a, self.b)
    }
}

/// A component singled out by localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ComponentId {
    Gpu(GpuId),
    Link(LinkId),
}

impl std::fmt::Display for ComponentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComponentId::Gpu(g) => write!(f, "gpu{g}"),
            ComponentId::Link(l) => write!(f, "{l}"),
        }
    }
}

/// Placement of one rank on a physical GPU slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GpuSlot {
    pub node: NodeId,
    pub slot: usize,
}

/// Rank-to-GPU placement, indexed by rank.
pub type Placement = Vec<GpuSlot>;

/// Logical coordinates of a rank inside the TP x DP x PP grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankCoords {
    pub tp: usize,
    pub dp: usize,
    pub pp: usize,
}

/// Rank-to-node mapping plus the TP/DP/PP group structure and the
/// inter-node link inventory.
///
/// Rank order follows the usual hybrid-parallel layout: TP index varies
/// fastest, then DP, then PP, so each TP group occupies consecutive ranks
/// and stays on a single node.
#[derive(Debug, Clone)]
pub struct ParallelTopology {
    pub tp_size: usize,
    pub dp_size: usize,
    pub pp_size: usize,
    pub nodes: Vec<NodeId>,
    pub gpus_per_node: usize,
    pub placement: Placement,
    pub links: Vec<Link>,
    pub intra_node_bandwidth: f64,
}

/// Undirected inter-node link with its healthy bandwidth in bytes/s.
#[derive(Debug, Clone, Copy)]
pub struct Link {
    pub id: LinkId,
    pub bandwidth: f64,
}

impl ParallelTopology {
    /// Builds a topology with the canonical placement: rank `r` lands on
    /// node `r / gpus_per_node`, slot `r % gpus_per_node`.
    pub fn canonical(
        tp_size: usize,
        dp_size: usize,
        pp_size: usize,
        gpus_per_node: usize,
        links: Vec<Link>,
        intra_node_bandwidth: f64,
    ) -> Result<Self> {
        let total = tp_size * dp_size * pp_size;
        if total == 0 {
            return Err(Error::InvalidTopology(
                "tp_size, dp_size and pp_size must all be positive".into(),
            ));
        }
        if gpus_per_node == 0 || !total.is_multiple_of(gpus_per_node) {
            return Err(Error::InvalidTopology(format!(
                "gpus_per_node {gpus_per_node} must be positive and divide total ranks {total}"
            )));
        }
        let node_count = total / gpus_per_node;
        let placement = (0..total)
            .map(|r| GpuSlot {
                node: r / gpus_per_node,
                slot: r % gpus_per_node,
            })
            .collect();
        let topo = Self {
            tp_size,
            dp_size,
            pp_size,
            nodes: (0..node_count).collect(),
            gpus_per_node,
            placement,
            links,
            intra_node_bandwidth,
        };
        topo.validate()?;
        Ok(topo)
    }

    /// Builds a fully connected inter-node link inventory at one bandwidth.
    pub fn full_mesh_links(node_count: usize, bandwidth: f64) -> Vec<Link> {
        let mut links = Vec::new();
        for a in 0..node_count {
            for b in (a + 1)..node_count {
                links.push(Link {
                    id: LinkId::new(a, b),
                    bandwidth,
                });
            }
        }
        links
    }

    pub fn total_ranks(&self) -> usize {
        self.tp_size * self.dp_size * self.pp_size
    }

    pub fn coords(&self, rank: RankId) -> RankCoords {
        RankCoords {
            tp: rank % self.tp_size,
            dp: (rank / self.tp_size) % self.dp_size,
            pp: rank / (self.tp_size * self.dp_size),
        }
    }

    pub fn rank_of(&self, tp: usize, dp: usize, pp: usize) -> RankId {
        tp + self.tp_size * (dp + self.dp_size * pp)
    }

    /// Ranks of the TP group holding replica `dp` at stage `pp`.
    pub fn tp_group(&self, dp: usize, pp: usize) -> Vec<RankId> {
        (0..self.tp_size).map(|t| self.rank_of(t, dp, pp)).collect()
    }

    /// Ranks of the DP all-reduce group for shard `(tp, pp)`.
    pub fn dp_group(&self, tp: usize, pp: usize) -> Vec<RankId> {
        (0..self.dp_size).map(|d| self.rank_of(tp, d, pp)).collect()
    }

    pub fn gpu_id(&self, slot: GpuSlot) -> GpuId {
        slot.node * self.gpus_per_node + slot.slot
    }

    pub fn gpu_of_rank(&self, placement: &Placement, rank: RankId) -> GpuId {
        self.gpu_id(placement[rank])
    }

    pub fn total_gpus(&self) -> usize {
        self.nodes.len() * self.gpus_per_node
    }

    /// Node hosting the TP group `(dp, pp)` under `placement`.
    pub fn node_of_group(&self, placement: &Placement, dp: usize, pp: usize) -> NodeId {
        placement[self.rank_of(0, dp, pp)].node
    }

    pub fn link_bandwidth(&self, a: NodeId, b: NodeId) -> Option<f64> {
        if a == b {
            return Some(self.intra_node_bandwidth);
        }
        let id = LinkId::new(a, b);
        self.links.iter().find(|l| l.id == id).map(|l| l.bandwidth)
    }

    /// Checks the structural invariants; `placement` defaults to the
    /// topology's own placement.
    pub fn validate(&self) -> Result<()> {
        self.validate_placement(&self.placement)
    }

    pub fn validate_placement(&self, placement: &Placement) -> Result<()> {
        let total = self.total_ranks();
        if placement.len() != total {
            return Err(Error::InvalidTopology(format!(
                "placement covers {} ranks, expected {}",
                placement.len(),
                total
            )));
        }
        let mut seen = BTreeSet::new();
        for (rank, slot) in placement.iter().enumerate() {
            if !self.nodes.contains(&slot.node) || slot.slot >= self.gpus_per_node {
                return Err(Error::InvalidTopology(format!(
                    "rank {rank} placed on unknown gpu (node {}, slot {})",
                    slot.node, slot.slot
                )));
            }
            if !seen.insert((slot.node, slot.slot)) {
                return Err(Error::InvalidTopology(format!(
                    "gpu (node {}, slot {}) assigned to more than one rank",
                    slot.node, slot.slot
                )));
            }
        }
        // TP groups must not straddle nodes.
        for pp in 0..self.pp_size {
            for dp in 0..self.dp_size {
                let nodes: BTreeSet<NodeId> = self
                    .tp_group(dp, pp)
                    .iter()
                    .map(|&r| placement[r].node)
                    .collect();
                if nodes.len() > 1 {
                    return Err(Error::InvalidTopology(format!(
                        "tp group (dp {dp}, pp {pp}) spans nodes {nodes:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Inverse of `placement`: gpu id -> rank.
    pub fn rank_by_gpu(&self, placement: &Placement) -> BTreeMap<GpuId, RankId> {
        placement
            .iter()
            .enumerate()
            .map(|(rank, slot)| (self.gpu_id(*slot), rank))
            .collect()
    }
}
