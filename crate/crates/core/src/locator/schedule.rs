use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::RankId;

/// Ordered passes of vertex-disjoint point-to-point transfers covering a
/// communicator's links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationSchedule {
    /// Each pass holds `(sender, receiver)` pairs; within a pass no rank
    /// appears twice.
    pub passes: Vec<Vec<(RankId, RankId)>>,
}

impl ValidationSchedule {
    /// Stable, diffable text form: one line per pass.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, pass) in self.passes.iter().enumerate() {
            out.push_str(&format!("pass {i}:"));
            for (s, r) in pass {
                out.push_str(&format!(" {s}->{r}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn pair_count(&self) -> usize {
        self.passes.iter().map(Vec::len).sum()
    }
}

/// P2P schedule for a ring of `n` ranks. Even rings finish in two passes
/// (even-to-odd neighbours, then odd-to-even); odd rings need a third pass
/// for the wrap-around link. Every ring link is exercised exactly once.
pub fn ring_schedule(n: usize) -> Result<ValidationSchedule> {
    if n < 2 {
        return Err(Error::InvalidCommunicator(format!(
            "ring needs at least 2 ranks, got {n}"
        )));
    }
    if n == 2 {
        // Degenerate ring with a single link.
        return Ok(ValidationSchedule {
            passes: vec![vec![(0, 1)]],
        });
    }
    let mut passes = Vec::new();
    if n.is_multiple_of(2) {
        passes.push((0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect());
        passes.push((0..n / 2).map(|i| (2 * i + 1, (2 * i + 2) % n)).collect());
    } else {
        passes.push((0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect());
        passes.push((0..n / 2).map(|i| (2 * i + 1, 2 * i + 2)).collect());
        passes.push(vec![(n - 1, 0)]);
    }
    Ok(ValidationSchedule { passes })
}

/// Rooted binary tree given as a child -> parent map.
#[derive(Debug, Clone)]
pub struct TreeTopology {
    pub parent: BTreeMap<RankId, RankId>,
}

impl TreeTopology {
    pub fn new(parent: BTreeMap<RankId, RankId>) -> Self {
        Self { parent }
    }

    fn ranks(&self) -> BTreeSet<RankId> {
        self.parent
            .iter()
            .flat_map(|(&c, &p)| [c, p])
            .collect()
    }
}

/// P2P schedule for a (binary) tree communicator: four passes, sending
/// from left then right children at even levels, then the same from odd
/// levels. Each child-parent edge is exercised exactly once and senders
/// and receivers sit on different level parities, so passes stay
/// vertex-disjoint.
pub fn tree_schedule(tree: &TreeTopology) -> Result<ValidationSchedule> {
    let ranks = tree.ranks();
    if tree.parent.is_empty() {
        return Err(Error::InvalidTree("tree has no edges".into()));
    }
    let roots: Vec<RankId> = ranks
        .iter()
        .copied()
        .filter(|r| !tree.parent.contains_key(r))
        .collect();
    if roots.len() != 1 {
        return Err(Error::InvalidTree(format!(
            "expected exactly one root, found {roots:?}"
        )));
    }
    let root = roots[0];

    // Children sorted by rank id: index 0 is the left child.
    let mut children: BTreeMap<RankId, Vec<RankId>> = BTreeMap::new();
    for (&c, &p) in &tree.parent {
        children.entry(p).or_default().push(c);
    }
    for (p, cs) in &mut children {
        cs.sort_unstable();
        if cs.len() > 2 {
            return Err(Error::InvalidTree(format!(
                "rank {p} has {} children; validation covers binary trees",
                cs.len()
            )));
        }
    }

    // Levels by BFS; anything unreachable from the root implies a cycle.
    let mut level: BTreeMap<RankId, usize> = BTreeMap::new();
    level.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(r) = queue.pop_front() {
        let l = level[&r];
        for &c in children.get(&r).map(Vec::as_slice).unwrap_or(&[]) {
            level.insert(c, l + 1);
            queue.push_back(c);
        }
    }
    if level.len() != ranks.len() {
        let stray: Vec<RankId> = ranks
            .iter()
            .copied()
            .filter(|r| !level.contains_key(r))
            .collect();
        return Err(Error::InvalidTree(format!(
            "cycle in parent map: ranks {stray:?} are unreachable from root {root}"
        )));
    }

    let mut passes: Vec<Vec<(RankId, RankId)>> = vec![Vec::new(); 4];
    for cs in children.values() {
        for (idx, &c) in cs.iter().enumerate() {
            let parent = tree.parent[&c];
            let pass = match (level[&c].is_multiple_of(2), idx) {
                (true, 0) => 0,
                (true, _) => 1,
                (false, 0) => 2,
                (false, _) => 3,
            };
            passes[pass].push((c, parent));
        }
    }
    for pass in &mut passes {
        pass.sort_unstable();
    }
    Ok(ValidationSchedule { passes })
}
