//! Exhaustive partition space of a small graph.
//!
//! Every unlabeled partition of `{0, …, n-1}` becomes a metanode, and two
//! metanodes are joined when relocating a single node turns one into the
//! other. Because the gain of such a relocation is `Δd - γ Δn`, each edge
//! has a fixed type: it favors the same endpoint for every `γ`, or it is
//! frustrated and flips direction at `γ* ∈ (0, 1)`. Orienting every edge
//! toward the higher potential at a given `γ` yields a DAG whose sinks are
//! exactly the equilibria.
//!
//! Partitions here are canonical (restricted-growth labels), with no empty
//! slots. [`SetPartition::to_partition`] gives a labeled partition with `n`
//! slots, so any block can still split off a singleton.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{canonical_labels, write_blocks, Partition};
use crate::potential::MoveDeltas;
use crate::resolution::{fraction_string, Resolution};
use crate::robustness::{classify_move, MoveClass};

/// Largest node count accepted by the enumeration.
pub const MAX_NODES: usize = 10;

/// Bell number `B_n`, the number of set partitions of `n` items.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// A set partition stored as restricted-growth labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    labels: Vec<u8>,
}

impl SetPartition {
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn block_count(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i);
        }
        blocks
    }

    /// Canonical form of a labeled partition: empty slots dropped, blocks
    /// ordered by smallest member.
    pub fn from_partition(part: &Partition) -> Self {
        Self { labels: part.canonical_labels().into_iter().map(|l| l as u8).collect() }
    }

    /// Labeled partition with `n` slots.
    pub fn to_partition(&self) -> Partition {
        let n = self.labels.len();
        Partition::new(self.labels.iter().map(|&l| l as usize).collect(), n.max(1))
            .expect("restricted-growth labels are below n")
    }

    fn key(&self) -> u64 {
        pack(&self.labels)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_blocks(f, &self.blocks())
    }
}

fn pack(labels: &[u8]) -> u64 {
    labels.iter().fold(0u64, |acc, &l| (acc << 4) | l as u64)
}

/// Every set partition of `n` items in lexicographic order of their labels.
/// The first is the grand coalition and the last the all-singletons
/// partition.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    if n > MAX_NODES {
        return Err(Error::TooLarge { n, cap: MAX_NODES });
    }
    let mut out = Vec::with_capacity(bell(n) as usize);
    let mut labels = vec![0u8; n];
    let mut max_prefix = vec![0u8; n];
    loop {
        out.push(SetPartition { labels: labels.clone() });
        // Advance to the next restricted-growth string.
        let mut pos = n;
        loop {
            if pos <= 1 {
                return Ok(out);
            }
            pos -= 1;
            if labels[pos] <= max_prefix[pos - 1] {
                labels[pos] += 1;
                break;
            }
        }
        max_prefix[pos] = max_prefix[pos - 1].max(labels[pos]);
        for j in pos + 1..n {
            labels[j] = 0;
            max_prefix[j] = max_prefix[pos];
        }
    }
}

/// Direction-independent type of a metagraph edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// The move toward `toward` is never worse, whatever `γ`.
    Unidirectional { toward: usize },
    /// Gain changes sign at `γ* ∈ (0, 1)`.
    Frustrated { gamma_star: Ratio<i64> },
    /// Zero gain at every `γ`.
    Neutral,
}

impl EdgeKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EdgeKind::Unidirectional { .. } => "unidirectional",
            EdgeKind::Frustrated { .. } => "frustrated",
            EdgeKind::Neutral => "neutral",
        }
    }
}

/// Edge between metanodes `a < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaEdge {
    pub a: usize,
    pub b: usize,
    /// Bit `i` set iff relocating node `i` turns `a` into `b`.
    movers: u16,
    /// Deltas of the move from `a` to `b`; every mover has the same.
    pub deltas: MoveDeltas,
}

impl MetaEdge {
    pub fn movers(&self) -> Vec<usize> {
        (0..16).filter(|&i| self.movers & (1 << i) != 0).collect()
    }

    pub fn forward_class(&self) -> MoveClass {
        classify_move(self.deltas)
    }

    pub fn backward_class(&self) -> MoveClass {
        classify_move(self.deltas.reversed())
    }

    pub fn kind(&self) -> EdgeKind {
        match self.forward_class() {
            MoveClass::AlwaysPreferred => EdgeKind::Unidirectional { toward: self.b },
            MoveClass::NeverPreferred => EdgeKind::Unidirectional { toward: self.a },
            MoveClass::FrustratedGainBelow(g) | MoveClass::FrustratedGainAbove(g) => {
                EdgeKind::Frustrated { gamma_star: g }
            }
            MoveClass::Neutral => EdgeKind::Neutral,
        }
    }

    /// Gain of moving from `a` to `b`, in units of `1/c`.
    pub fn gain_units(&self, gamma: Resolution) -> i128 {
        self.deltas.gain_units(gamma)
    }
}

/// All partitions of a graph and the single-move edges between them.
#[derive(Clone, Debug)]
pub struct MetaGraph {
    pub partitions: Vec<SetPartition>,
    pub edges: Vec<MetaEdge>,
    index: HashMap<u64, usize>,
}

impl MetaGraph {
    pub fn node_count(&self) -> usize {
        self.partitions.len()
    }

    /// Metanode id of a labeled partition.
    pub fn index_of(&self, part: &Partition) -> Option<usize> {
        self.index.get(&SetPartition::from_partition(part).key()).copied()
    }

    /// Neighbor lists of the undirected metagraph.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }

    /// Move distance from `source` to every metanode.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Enumerates the partitions of `graph` and their single-move edges.
pub fn build_metagraph(graph: &Graph) -> Result<MetaGraph> {
    let n = graph.node_count();
    let partitions = enumerate_partitions(n)?;
    let index: HashMap<u64, usize> = partitions.iter().enumerate().map(|(i, p)| (p.key(), i)).collect();

    let edges: Vec<MetaEdge> = partitions
        .par_iter()
        .enumerate()
        .flat_map_iter(|(a, p)| {
            let labels = p.labels();
            let blocks = p.block_count();
            let mut sizes = vec![0usize; blocks + 1];
            for &l in labels {
                sizes[l as usize] += 1;
            }
            let mut found: Vec<(usize, usize, MoveDeltas)> = Vec::new();
            let mut counts = vec![0usize; blocks + 1];
            let mut moved = labels.to_vec();
            for i in 0..n {
                counts.iter_mut().for_each(|c| *c = 0);
                for &j in graph.neighbors(i) {
                    counts[labels[j] as usize] += 1;
                }
                let from = labels[i] as usize;
                for t in 0..=blocks {
                    if t == from || (t == blocks && sizes[from] == 1) {
                        continue;
                    }
                    moved[i] = t as u8;
                    let canon: Vec<u8> = canonical_labels(&moved.iter().map(|&l| l as usize).collect::<Vec<_>>())
                        .into_iter()
                        .map(|l| l as u8)
                        .collect();
                    let b = index[&pack(&canon)];
                    if b > a {
                        found.push((b, i, MoveDeltas::from_counts(counts[t], counts[from], sizes[t], sizes[from])));
                    }
                }
                moved[i] = labels[i];
            }
            found.sort_by_key(|&(b, i, _)| (b, i));
            let mut edges: Vec<MetaEdge> = Vec::new();
            for (b, i, deltas) in found {
                match edges.last_mut() {
                    Some(e) if e.b == b => {
                        debug_assert_eq!(e.deltas, deltas);
                        e.movers |= 1 << i;
                    }
                    _ => edges.push(MetaEdge { a, b, movers: 1 << i, deltas }),
                }
            }
            edges
        })
        .collect();

    Ok(MetaGraph { partitions, edges, index })
}

/// The metagraph with each edge pointing toward higher potential at one `γ`.
#[derive(Clone, Debug)]
pub struct OrientedMetaGraph {
    pub gamma: Resolution,
    /// `(from, to, edge index)`.
    pub arcs: Vec<(usize, usize, usize)>,
    node_count: usize,
}

impl OrientedMetaGraph {
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(u, _, _) in &self.arcs {
            deg[u] += 1;
        }
        deg
    }

    /// Kahn's algorithm over the arcs.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.node_count];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.node_count];
        for &(u, v, _) in &self.arcs {
            indeg[v] += 1;
            out[u].push(v);
        }
        let mut ready: Vec<usize> = (0..self.node_count).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = ready.pop() {
            seen += 1;
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(v);
                }
            }
        }
        seen == self.node_count
    }
}

/// Points every edge toward strictly higher potential; zero-gain edges are dropped.
pub fn orient(meta: &MetaGraph, gamma: Resolution) -> OrientedMetaGraph {
    let arcs = meta
        .edges
        .iter()
        .enumerate()
        .filter_map(|(idx, e)| match e.gain_units(gamma).signum() {
            1 => Some((e.a, e.b, idx)),
            -1 => Some((e.b, e.a, idx)),
            _ => None,
        })
        .collect();
    OrientedMetaGraph { gamma, arcs, node_count: meta.node_count() }
}

/// Metanode ids with no outgoing arc, in increasing order.
pub fn sinks(oriented: &OrientedMetaGraph) -> Vec<usize> {
    oriented
        .out_degrees()
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == 0)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Serialize)]
struct JsonNode {
    id: usize,
    partition: String,
    blocks: usize,
    distance_to_grand_coalition: usize,
    distance_to_singletons: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sink: Option<bool>,
}

#[derive(Serialize)]
struct JsonSense {
    from: usize,
    to: usize,
    class: &'static str,
}

#[derive(Serialize)]
struct JsonEdge {
    a: usize,
    b: usize,
    movers: Vec<usize>,
    delta_d: i64,
    delta_dhat: i64,
    delta_n: i64,
    gamma_star: String,
    #[serde(rename = "type")]
    kind: &'static str,
    senses: [JsonSense; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<[usize; 2]>,
}

#[derive(Serialize)]
struct JsonMeta {
    nodes: usize,
    metanodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<String>,
}

fn gamma_star_string(e: &MetaEdge) -> String {
    match e.forward_class().threshold() {
        Some(g) => fraction_string(&g),
        None => "none".into(),
    }
}

/// JSON export. With `gamma`, each edge also carries its orientation and
/// each metanode a sink flag.
pub fn to_json(meta: &MetaGraph, gamma: Option<Resolution>) -> Result<String> {
    let oriented = gamma.map(|g| orient(meta, g));
    let out_deg = oriented.as_ref().map(|o| o.out_degrees());
    let mut direction = vec![None; meta.edges.len()];
    if let Some(o) = &oriented {
        for &(u, v, idx) in &o.arcs {
            direction[idx] = Some([u, v]);
        }
    }
    let last = meta.node_count().saturating_sub(1);
    let (to_grand, to_single) = (meta.distances_from(0), meta.distances_from(last));
    let metanodes = meta
        .partitions
        .iter()
        .enumerate()
        .map(|(id, p)| JsonNode {
            id,
            partition: p.to_string(),
            blocks: p.block_count(),
            distance_to_grand_coalition: to_grand[id],
            distance_to_singletons: to_single[id],
            sink: out_deg.as_ref().map(|d| d[id] == 0),
        })
        .collect();
    let edges = meta
        .edges
        .iter()
        .zip(direction)
        .map(|(e, direction)| JsonEdge {
            a: e.a,
            b: e.b,
            movers: e.movers(),
            delta_d: e.deltas.delta_d,
            delta_dhat: e.deltas.delta_dhat,
            delta_n: e.deltas.delta_n,
            gamma_star: gamma_star_string(e),
            kind: e.kind().tag(),
            senses: [
                JsonSense { from: e.a, to: e.b, class: e.forward_class().tag() },
                JsonSense { from: e.b, to: e.a, class: e.backward_class().tag() },
            ],
            direction,
        })
        .collect();
    let doc = JsonMeta {
        nodes: meta.partitions.first().map_or(0, |p| p.labels().len()),
        metanodes,
        edges,
        gamma: gamma.map(|g| g.to_string()),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// DOT export: an undirected graph, or a digraph oriented at `gamma`.
pub fn write_dot<W: Write>(meta: &MetaGraph, gamma: Option<Resolution>, mut out: W) -> Result<()> {
    let oriented = gamma.map(|g| orient(meta, g));
    let (keyword, arrow) = if oriented.is_some() { ("digraph", "->") } else { ("graph", "--") };
    writeln!(out, "{keyword} metagraph {{")?;
    let last = meta.node_count().saturating_sub(1);
    let (to_grand, to_single) = (meta.distances_from(0), meta.distances_from(last));
    let out_deg = oriented.as_ref().map(|o| o.out_degrees());
    for (id, p) in meta.partitions.iter().enumerate() {
        let shape = match &out_deg {
            Some(d) if d[id] == 0 => ", shape=doublecircle",
            _ => "",
        };
        writeln!(
            out,
            "  {id} [label=\"{p}\", grand_distance={}, singleton_distance={}{shape}];",
            to_grand[id], to_single[id]
        )?;
    }
    let attrs = |e: &MetaEdge| {
        format!(
            "type={}, gamma_star=\"{}\", movers=\"{}\"",
            e.kind().tag(),
            gamma_star_string(e),
            e.movers().iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
        )
    };
    match &oriented {
        Some(o) => {
            for &(u, v, idx) in &o.arcs {
                writeln!(out, "  {u} {arrow} {v} [{}];", attrs(&meta.edges[idx]))?;
            }
        }
        None => {
            for e in &meta.edges {
                writeln!(out, "  {} {arrow} {} [{}];", e.a, e.b, attrs(e))?;
            }
        }
    }
    writeln!(out, "}}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kite() -> Graph {
        Graph::parse_edge_list("0 1\n0 2\n0 3\n1 2", None).unwrap()
    }

    fn sink_names(meta: &MetaGraph, gamma: Resolution) -> Vec<String> {
        sinks(&orient(meta, gamma)).iter().map(|&s| meta.partitions[s].to_string()).collect()
    }

    #[test]
    fn bell_numbers() {
        let expected = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (n, &b) in expected.iter().enumerate() {
            assert_eq!(bell(n), b);
            if n <= 7 {
                assert_eq!(enumerate_partitions(n).unwrap().len() as u64, b);
            }
        }
        assert!(matches!(enumerate_partitions(11), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn enumeration_order_and_uniqueness() {
        let parts = enumerate_partitions(4).unwrap();
        assert_eq!(parts[0].to_string(), "{0,1,2,3}");
        assert_eq!(parts.last().unwrap().to_string(), "{0}|{1}|{2}|{3}");
        let mut sorted = parts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, parts);
    }

    #[test]
    fn three_node_adjacency() {
        let meta = build_metagraph(&Graph::complete(3)).unwrap();
        assert_eq!(meta.node_count(), 5);
        let grand = meta.index_of(&Partition::grand_coalition(3, 1).unwrap()).unwrap();
        let split = meta.index_of(&Partition::from_blocks(3, &[&[0, 1], &[2]], 2).unwrap()).unwrap();
        let edge = meta.edges.iter().find(|e| (e.a, e.b) == (grand, split)).unwrap();
        assert_eq!((edge.deltas.delta_d, edge.deltas.delta_dhat), (-2, 0));
        assert_eq!(edge.forward_class(), MoveClass::NeverPreferred);
        assert_eq!(edge.kind(), EdgeKind::Unidirectional { toward: grand });
        assert_eq!(sink_names(&meta, Resolution::ZERO), ["{0,1,2}"]);
    }

    #[test]
    fn shared_movers() {
        let meta = build_metagraph(&Graph::complete(2)).unwrap();
        assert_eq!(meta.edges.len(), 1);
        assert_eq!(meta.edges[0].movers(), [0, 1]);
    }

    #[test]
    fn four_node_sinks() {
        let meta = build_metagraph(&kite()).unwrap();
        assert_eq!(meta.node_count(), 15);
        assert_eq!(sink_names(&meta, Resolution::new(1, 10).unwrap()), ["{0,1,2,3}"]);
        assert_eq!(sink_names(&meta, Resolution::new(1, 2).unwrap()), ["{0,1,2}|{3}"]);
        assert_eq!(sinks(&orient(&meta, Resolution::ONE)).len(), 7);
        let mut union: Vec<usize> = (0..=10)
            .flat_map(|g| sinks(&orient(&meta, Resolution::new(g, 10).unwrap())))
            .collect();
        union.sort_unstable();
        union.dedup();
        assert_eq!(union.len(), 8);
        for g in 0..=10 {
            assert!(orient(&meta, Resolution::new(g, 10).unwrap()).is_acyclic());
        }
    }

    #[test]
    fn edgeless_graph_at_one() {
        let meta = build_metagraph(&Graph::empty(3)).unwrap();
        assert!(sink_names(&meta, Resolution::ONE).contains(&"{0}|{1}|{2}".to_string()));
    }

    #[test]
    fn exports() {
        let meta = build_metagraph(&kite()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&to_json(&meta, Some(Resolution::ONE)).unwrap()).unwrap();
        assert_eq!(json["metanodes"].as_array().unwrap().len(), 15);
        assert_eq!(json["metanodes"][0]["distance_to_singletons"], 3);
        let mut dot = Vec::new();
        write_dot(&meta, None, &mut dot).unwrap();
        let dot = String::from_utf8(dot).unwrap();
        assert!(dot.starts_with("graph metagraph {"));
        assert!(dot.contains("label=\"{0,1,2,3}\""));
    }

    #[test]
    fn bridge_round_trip() {
        for p in enumerate_partitions(5).unwrap() {
            assert_eq!(SetPartition::from_partition(&p.to_partition()), p);
        }
    }
}
