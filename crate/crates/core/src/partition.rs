//! Labeled partitions with a fixed number of community slots, plus the
//! degree-counting primitives shared by every other module.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Assignment of `n` nodes to `K` labeled slots. Slots may be empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    membership: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Builds a partition with exactly `k` slots.
    pub fn new(membership: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 && !membership.is_empty() {
            return Err(Error::InvalidPartition("zero slots for a non-empty node set".into()));
        }
        let mut sizes = vec![0; k];
        for (node, &slot) in membership.iter().enumerate() {
            if slot >= k {
                return Err(Error::InvalidPartition(format!(
                    "node {node} is in slot {slot} but only {k} slots exist"
                )));
            }
            sizes[slot] += 1;
        }
        Ok(Self { membership, sizes })
    }

    /// Slot count is `1 + max label`.
    pub fn from_membership(membership: Vec<usize>) -> Self {
        let k = membership.iter().map(|&s| s + 1).max().unwrap_or(0);
        Self::new(membership, k).expect("slot count covers every label")
    }

    /// Builds a partition from explicit blocks; nodes absent from every block
    /// are an error, as are nodes listed twice.
    pub fn from_blocks(n: usize, blocks: &[&[usize]], k: usize) -> Result<Self> {
        if blocks.len() > k {
            return Err(Error::InvalidPartition(format!("{} blocks do not fit in {k} slots", blocks.len())));
        }
        let mut membership = vec![usize::MAX; n];
        for (slot, block) in blocks.iter().enumerate() {
            for &node in *block {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
                if membership[node] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("node {node} listed twice")));
                }
                membership[node] = slot;
            }
        }
        if let Some(node) = membership.iter().position(|&s| s == usize::MAX) {
            return Err(Error::InvalidPartition(format!("node {node} is unassigned")));
        }
        Self::new(membership, k)
    }

    /// Every node alone in its own slot (`K = n`).
    pub fn singletons(n: usize) -> Self {
        Self { membership: (0..n).collect(), sizes: vec![1; n] }
    }

    /// Every node in slot 0, with `k - 1` empty slots.
    pub fn grand_coalition(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![0; n], k.max(1))
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    /// Number of slots `K`, including empty ones.
    pub fn slot_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn community_of(&self, i: usize) -> usize {
        self.membership[i]
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn occupied_count(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    /// Lowest-index empty slot, if any.
    pub fn first_empty_slot(&self) -> Option<usize> {
        self.sizes.iter().position(|&s| s == 0)
    }

    /// Same membership with more (or the same number of) slots.
    pub fn with_slot_count(&self, k: usize) -> Result<Self> {
        Self::new(self.membership.clone(), k)
    }

    /// Moves `i` to `target` without any gain bookkeeping.
    pub(crate) fn relocate(&mut self, i: usize, target: usize) {
        let from = self.membership[i];
        self.sizes[from] -= 1;
        self.sizes[target] += 1;
        self.membership[i] = target;
    }

    pub(crate) fn check_slot(&self, k: usize) -> Result<()> {
        if k < self.slot_count() {
            Ok(())
        } else {
            Err(Error::SlotOutOfRange { slot: k, k: self.slot_count() })
        }
    }

    /// Non-empty blocks, each sorted, ordered by their smallest member.
    pub fn canonical_blocks(&self) -> Vec<Vec<usize>> {
        let mut by_slot: Vec<Vec<usize>> = vec![Vec::new(); self.slot_count()];
        for (node, &slot) in self.membership.iter().enumerate() {
            by_slot[slot].push(node);
        }
        let mut blocks: Vec<Vec<usize>> = by_slot.into_iter().filter(|b| !b.is_empty()).collect();
        blocks.sort_by_key(|b| b[0]);
        blocks
    }

    /// Restricted-growth labels: the block of node 0 is 0, the next new block
    /// seen is 1, and so on. Two partitions group nodes identically iff their
    /// canonical labels are equal.
    pub fn canonical_labels(&self) -> Vec<usize> {
        canonical_labels(&self.membership)
    }

    /// True if both partitions group the nodes the same way, ignoring labels
    /// and empty slots.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.node_count() == other.node_count() && self.canonical_labels() == other.canonical_labels()
    }

    /// Parses the partition text format: one slot index per line (line `i`
    /// holds `σ_i`), or a JSON integer array. A leading `k <count>` line sets
    /// the slot count; otherwise it is `1 + max label`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('[') {
            let membership: Vec<usize> = serde_json::from_str(trimmed)?;
            return Ok(Self::from_membership(membership));
        }
        let mut k = None;
        let mut membership = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('k') {
                if membership.is_empty() && k.is_none() {
                    let count = rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad slot count header {line:?}"),
                    })?;
                    k = Some(count);
                    continue;
                }
            }
            let slot = line.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a community index, got {line:?}"),
            })?;
            membership.push(slot);
        }
        match k {
            Some(k) => Self::new(membership, k),
            None => Ok(Self::from_membership(membership)),
        }
    }

    /// Writes `k <count>` then one label per line.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k {}", self.slot_count())?;
        for slot in &self.membership {
            writeln!(out, "{slot}")?;
        }
        Ok(())
    }
}

/// Block-list rendering, e.g. `{0,1}|{2,3}`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_blocks(f, &self.canonical_blocks())
    }
}

pub(crate) fn write_blocks(f: &mut impl fmt::Write, blocks: &[Vec<usize>]) -> fmt::Result {
    for (b, block) in blocks.iter().enumerate() {
        if b > 0 {
            f.write_char('|')?;
        }
        f.write_char('{')?;
        for (j, node) in block.iter().enumerate() {
            if j > 0 {
                f.write_char(',')?;
            }
            write!(f, "{node}")?;
        }
        f.write_char('}')?;
    }
    Ok(())
}

pub(crate) fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut remap = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = remap.len();
            *remap.entry(l).or_insert(next)
        })
        .collect()
}

/// Neighbors (`d`) and non-neighbors (`dhat`) of a node inside one slot.
///
/// `dhat = n_k - d - [σ_i = k]`, so the node never counts itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreePair {
    pub d: usize,
    pub dhat: usize,
}

/// Degree pair of node `i` with respect to slot `k`.
pub fn degrees_in(graph: &Graph, part: &Partition, i: usize, k: usize) -> Result<DegreePair> {
    check_compatible(graph, part)?;
    graph.check_node(i)?;
    part.check_slot(k)?;
    let d = graph.neighbors(i).iter().filter(|&&j| part.community_of(j) == k).count();
    let own = usize::from(part.community_of(i) == k);
    Ok(DegreePair { d, dhat: part.size(k) - d - own })
}

/// Size and internal edge count of one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommunityStats {
    pub size: usize,
    pub internal_edges: usize,
}

/// Per-slot `(n_k, m_k)`.
pub fn community_stats(graph: &Graph, part: &Partition) -> Result<Vec<CommunityStats>> {
    check_compatible(graph, part)?;
    let mut stats: Vec<CommunityStats> = part
        .sizes()
        .iter()
        .map(|&size| CommunityStats { size, internal_edges: 0 })
        .collect();
    for (u, v) in graph.edges() {
        let k = part.community_of(u);
        if k == part.community_of(v) {
            stats[k].internal_edges += 1;
        }
    }
    Ok(stats)
}

pub(crate) fn check_compatible(graph: &Graph, part: &Partition) -> Result<()> {
    if graph.node_count() == part.node_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: graph.node_count(), right: part.node_count() })
    }
}

/// Fills `counts[k]` with the number of neighbors of `i` in slot `k`.
/// `counts` must be zeroed and have one entry per slot; the touched slots are
/// pushed to `touched` so the caller can reset them cheaply.
pub(crate) fn neighbor_counts(
    graph: &Graph,
    part: &Partition,
    i: usize,
    counts: &mut [usize],
    touched: &mut Vec<usize>,
) {
    for &j in graph.neighbors(i) {
        let k = part.community_of(j);
        if counts[k] == 0 {
            touched.push(k);
        }
        counts[k] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kite() -> Graph {
        Graph::parse_edge_list("0 1\n0 2\n0 3\n1 2", None).unwrap()
    }

    /// Two triangles {0,1,2} and {3,4,5} joined by the bridge 1-4.
    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (1, 4)]).unwrap()
    }

    #[test]
    fn degrees_in_grand_coalition() {
        let g = kite();
        let p = Partition::grand_coalition(4, 1).unwrap();
        assert_eq!(degrees_in(&g, &p, 0, 0).unwrap(), DegreePair { d: 3, dhat: 0 });
        assert_eq!(degrees_in(&g, &p, 3, 0).unwrap(), DegreePair { d: 1, dhat: 2 });
    }

    #[test]
    fn degrees_in_empty_slot() {
        let g = kite();
        let p = Partition::grand_coalition(4, 3).unwrap();
        assert_eq!(degrees_in(&g, &p, 2, 2).unwrap(), DegreePair { d: 0, dhat: 0 });
    }

    #[test]
    fn degrees_in_rejects_bad_indices() {
        let g = kite();
        let p = Partition::grand_coalition(4, 2).unwrap();
        assert!(matches!(degrees_in(&g, &p, 4, 0), Err(Error::NodeOutOfRange { .. })));
        assert!(matches!(degrees_in(&g, &p, 0, 2), Err(Error::SlotOutOfRange { .. })));
    }

    #[test]
    fn stats_of_two_triangles() {
        let g = two_triangles();
        let split = Partition::from_blocks(6, &[&[0, 1, 2], &[3, 4, 5]], 2).unwrap();
        let stats = community_stats(&g, &split).unwrap();
        assert_eq!(stats, vec![CommunityStats { size: 3, internal_edges: 3 }; 2]);

        let grand = Partition::grand_coalition(6, 1).unwrap();
        assert_eq!(community_stats(&g, &grand).unwrap(), vec![CommunityStats { size: 6, internal_edges: 7 }]);

        let single = Partition::singletons(6);
        assert!(community_stats(&g, &single).unwrap().iter().all(|s| s.internal_edges == 0));
    }

    #[test]
    fn canonical_form_ignores_labels_and_empty_slots() {
        let a = Partition::new(vec![2, 2, 0, 4], 5).unwrap();
        let b = Partition::new(vec![0, 0, 1, 2], 3).unwrap();
        assert!(a.same_grouping(&b));
        assert_eq!(a.canonical_blocks(), vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(a.to_string(), "{0,1}|{2}|{3}");
    }

    #[test]
    fn parse_text_and_json() {
        let p = Partition::parse("0\n0\n1\n").unwrap();
        assert_eq!((p.membership(), p.slot_count()), (&[0, 0, 1][..], 2));
        let p = Partition::parse("k 4\n0\n0\n0\n0\n").unwrap();
        assert_eq!(p.slot_count(), 4);
        let p = Partition::parse("[1, 0, 1]").unwrap();
        assert_eq!(p.sizes(), &[1, 2]);
        assert!(Partition::parse("k 1\n0\n1\n").is_err());
        assert!(matches!(Partition::parse("0\nfoo\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn write_then_parse() {
        let p = Partition::new(vec![1, 0, 1, 1], 3).unwrap();
        let mut buf = Vec::new();
        p.write(&mut buf).unwrap();
        assert_eq!(Partition::parse(std::str::from_utf8(&buf).unwrap()).unwrap(), p);
    }

    #[test]
    fn from_blocks_validation() {
        assert!(Partition::from_blocks(3, &[&[0, 1]], 2).is_err());
        assert!(Partition::from_blocks(3, &[&[0, 1], &[1, 2]], 2).is_err());
        assert!(Partition::from_blocks(3, &[&[0], &[1], &[2]], 2).is_err());
    }
}
