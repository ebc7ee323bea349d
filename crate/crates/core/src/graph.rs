//! Immutable simple undirected graphs and the edge-list text format.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::resolution::Resolution;

/// A simple undirected graph on nodes `0..n` with sorted adjacency lists.
///
/// No self-loops and no parallel edges; `j ∈ adj(i)` iff `i ∈ adj(j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicate and reversed edges are
    /// merged; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange { node: u, n });
            }
            if v >= n {
                return Err(Error::NodeOutOfRange { node: v, n });
            }
            if u == v {
                return Err(Error::SelfLoop { line: 0, node: u });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_raw(adjacency))
    }

    fn from_raw(mut adjacency: Vec<Vec<usize>>) -> Self {
        let mut degree_sum = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            degree_sum += list.len();
        }
        Self { adjacency, edge_count: degree_sum / 2 }
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self { adjacency: vec![Vec::new(); n], edge_count: 0 }
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Self { adjacency, edge_count: n * n.saturating_sub(1) / 2 }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor list of `i`. Panics if `i` is out of range.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .is_some_and(|list| list.binary_search(&j).is_ok())
    }

    /// Every edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: i, n: self.node_count() })
        }
    }

    /// Parses the edge-list text format.
    ///
    /// One `u v` pair per line; blank lines and `#` comments are ignored. An
    /// optional first data line `n <count>` fixes the node count; without it
    /// `declared_n` is used, and failing that `1 + max id`.
    pub fn parse_edge_list(text: &str, declared_n: Option<usize>) -> Result<Self> {
        let mut header_n = None;
        let mut seen_data = false;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let first = fields.next().unwrap_or("");
            if first == "n" && !seen_data {
                let count = fields.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "header `n` without a count".into(),
                })?;
                header_n = Some(count.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad node count {count:?}"),
                })?);
                if fields.next().is_some() {
                    return Err(Error::Parse { line: line_no, message: "trailing data after header".into() });
                }
                seen_data = true;
                continue;
            }
            seen_data = true;
            let second = fields.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected two node ids, got {line:?}"),
            })?;
            if fields.next().is_some() {
                return Err(Error::Parse { line: line_no, message: format!("expected two node ids, got {line:?}") });
            }
            let u = parse_id(first, line_no)?;
            let v = parse_id(second, line_no)?;
            if u == v {
                return Err(Error::SelfLoop { line: line_no, node: u });
            }
            edges.push((u, v, line_no));
        }

        let max_id = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        let n = match header_n.or(declared_n) {
            Some(fixed) => {
                if let Some(&(u, v, line)) = edges.iter().find(|&&(u, v, _)| u.max(v) >= fixed) {
                    return Err(Error::IdOverflow { line, id: u.max(v) as u64, n: fixed });
                }
                fixed
            }
            None => max_id,
        };
        let mut adjacency = vec![Vec::new(); n];
        for (u, v, _) in edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_raw(adjacency))
    }

    /// Reads the edge-list format from a byte stream.
    pub fn read_edge_list<R: Read>(reader: R, declared_n: Option<usize>) -> Result<Self> {
        let mut reader = reader;
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse_edge_list(&text, declared_n)
    }

    /// Writes the graph with an `n` header so isolated trailing nodes survive.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n {}", self.node_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Edge set as an ordered set, handy for equality checks in tests.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges().collect()
    }
}

fn parse_id(token: &str, line: usize) -> Result<usize> {
    let id: u64 = token.parse().map_err(|_| {
        if !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()) {
            Error::IdOverflow { line, id: u64::MAX, n: usize::MAX }
        } else {
            Error::Parse { line, message: format!("bad node id {token:?}") }
        }
    })?;
    // Node ids are capped at u32::MAX.
    if id > u32::MAX as u64 {
        return Err(Error::IdOverflow { line, id, n: u32::MAX as usize });
    }
    Ok(id as usize)
}

/// Edge density `2m / (n(n-1))` as an exact resolution.
pub fn edge_density(graph: &Graph) -> Result<Resolution> {
    let n = graph.node_count() as u64;
    if n < 2 {
        return Err(Error::TooFewNodes(n as usize));
    }
    Resolution::new(2 * graph.edge_count() as u64, n * (n - 1))
}
