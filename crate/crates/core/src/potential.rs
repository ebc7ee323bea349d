//! CPM quality at pair, node, community and partition scale, and the gain of
//! a single-node move.
//!
//! With `γ = b/c`, a same-community pair is worth `1 - γ` if adjacent and `-γ`
//! otherwise. Summed over a partition this gives
//!
//! ```text
//! Φ(π) = Σ_k [ m_k - γ · C(n_k, 2) ]
//! ```
//!
//! Every function here returns integer units of `1/c`, so `c · Φ` is exact.
//! Moving node `i` from slot `B` to slot `A` changes the mover's own
//! potential and `Φ` by the same amount:
//!
//! ```text
//! c · Δφ = c · (d_A - d_B) - b · (n_A - n_B + 1)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{check_compatible, community_stats, degrees_in, Partition};
use crate::resolution::{Resolution, ScaledValue};

/// Value of one unordered node pair.
pub fn pair_value(adjacent: bool, same_community: bool, gamma: Resolution) -> ScaledValue {
    let (b, c) = (gamma.numer() as i128, gamma.denom() as i128);
    let units = match (same_community, adjacent) {
        (false, _) => 0,
        (true, true) => c - b,
        (true, false) => -b,
    };
    gamma.scaled(units)
}

/// Potential of node `i` towards slot `k`: `(1 - γ) d - γ d̂`, with `d̂` per
/// the as-joined convention (the node does not count itself).
pub fn node_potential(
    graph: &Graph,
    part: &Partition,
    i: usize,
    k: usize,
    gamma: Resolution,
) -> Result<ScaledValue> {
    let pair = degrees_in(graph, part, i, k)?;
    Ok(gamma.scaled(node_units(pair.d, pair.d + pair.dhat, gamma)))
}

/// `c·d - b·(d + d̂)` for a slot where the node would have `d` neighbors among
/// `others` co-members.
#[inline]
pub(crate) fn node_units(d: usize, others: usize, gamma: Resolution) -> i128 {
    gamma.denom() as i128 * d as i128 - gamma.numer() as i128 * others as i128
}

/// Community potential `m_k - γ C(n_k, 2)` in units of `1/c`.
pub fn community_units(size: usize, internal_edges: usize, gamma: Resolution) -> i128 {
    let pairs = (size as i128) * (size as i128 - 1) / 2;
    gamma.denom() as i128 * internal_edges as i128 - gamma.numer() as i128 * pairs
}

/// Partition potential `Σ_k [m_k - γ C(n_k, 2)]`, computed in `O(n + m)`.
pub fn partition_potential(graph: &Graph, part: &Partition, gamma: Resolution) -> Result<ScaledValue> {
    let units = community_stats(graph, part)?
        .iter()
        .map(|s| community_units(s.size, s.internal_edges, gamma))
        .sum();
    Ok(gamma.scaled(units))
}

/// Friend, stranger and size changes of a candidate move `B → A`.
///
/// `delta_n = delta_d + delta_dhat = n_A - n_B + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveDeltas {
    pub delta_d: i64,
    pub delta_dhat: i64,
    pub delta_n: i64,
}

impl MoveDeltas {
    /// From the mover's neighbor counts and the slot sizes before the move
    /// (`n_from` includes the mover).
    pub fn from_counts(d_to: usize, d_from: usize, n_to: usize, n_from: usize) -> Self {
        let delta_d = d_to as i64 - d_from as i64;
        let delta_n = n_to as i64 - n_from as i64 + 1;
        Self { delta_d, delta_dhat: delta_n - delta_d, delta_n }
    }

    pub fn from_d_dhat(delta_d: i64, delta_dhat: i64) -> Self {
        Self { delta_d, delta_dhat, delta_n: delta_d + delta_dhat }
    }

    /// `c·Δd - b·Δn`.
    #[inline]
    pub fn gain_units(&self, gamma: Resolution) -> i128 {
        gamma.denom() as i128 * self.delta_d as i128 - gamma.numer() as i128 * self.delta_n as i128
    }

    /// The move that undoes this one.
    pub fn reversed(&self) -> Self {
        Self { delta_d: -self.delta_d, delta_dhat: -self.delta_dhat, delta_n: -self.delta_n }
    }
}

/// A move's deltas together with its exact gain at a given resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveGain {
    pub delta_d: i64,
    pub delta_dhat: i64,
    pub delta_n: i64,
    /// `c · Δφ`, an integer.
    pub gain_units: i128,
    pub gamma: Resolution,
}

impl MoveGain {
    pub fn new(deltas: MoveDeltas, gamma: Resolution) -> Self {
        Self {
            delta_d: deltas.delta_d,
            delta_dhat: deltas.delta_dhat,
            delta_n: deltas.delta_n,
            gain_units: deltas.gain_units(gamma),
            gamma,
        }
    }

    pub fn deltas(&self) -> MoveDeltas {
        MoveDeltas { delta_d: self.delta_d, delta_dhat: self.delta_dhat, delta_n: self.delta_n }
    }

    pub fn gain(&self) -> ScaledValue {
        self.gamma.scaled(self.gain_units)
    }

    pub fn is_improving(&self) -> bool {
        self.gain_units > 0
    }
}

/// Gain of moving node `i` from its slot to `target`, in `O(deg(i))`.
pub fn move_gain(
    graph: &Graph,
    part: &Partition,
    i: usize,
    target: usize,
    gamma: Resolution,
) -> Result<MoveGain> {
    check_compatible(graph, part)?;
    graph.check_node(i)?;
    part.check_slot(target)?;
    let from = part.community_of(i);
    if from == target {
        return Err(Error::NoOpMove { node: i, slot: target });
    }
    let (mut d_to, mut d_from) = (0, 0);
    for &j in graph.neighbors(i) {
        let k = part.community_of(j);
        if k == target {
            d_to += 1;
        } else if k == from {
            d_from += 1;
        }
    }
    let deltas = MoveDeltas::from_counts(d_to, d_from, part.size(target), part.size(from));
    Ok(MoveGain::new(deltas, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(b: u64, c: u64) -> Resolution {
        Resolution::new(b, c).unwrap()
    }

    fn kite() -> Graph {
        Graph::parse_edge_list("0 1\n0 2\n0 3\n1 2", None).unwrap()
    }

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (1, 4)]).unwrap()
    }

    #[test]
    fn pair_values() {
        assert_eq!(pair_value(true, true, r(1, 4)).to_string(), "3/4");
        assert_eq!(pair_value(false, true, r(1, 4)).to_string(), "-1/4");
        assert_eq!(pair_value(true, false, r(1, 4)).units, 0);
        assert_eq!(pair_value(false, false, r(3, 7)).units, 0);
    }

    #[test]
    fn node_potentials() {
        let grand = Partition::grand_coalition(4, 1).unwrap();
        assert_eq!(node_potential(&kite(), &grand, 0, 0, r(1, 4)).unwrap().to_string(), "9/4");

        let split = Partition::from_blocks(6, &[&[0, 1, 2], &[3, 4, 5]], 2).unwrap();
        assert_eq!(node_potential(&two_triangles(), &split, 0, 0, Resolution::ZERO).unwrap().to_string(), "2/1");

        let with_empty = Partition::grand_coalition(4, 2).unwrap();
        assert_eq!(node_potential(&kite(), &with_empty, 2, 1, r(1, 3)).unwrap().units, 0);
    }

    #[test]
    fn partition_potentials() {
        let g = two_triangles();
        let split = Partition::from_blocks(6, &[&[0, 1, 2], &[3, 4, 5]], 2).unwrap();
        assert_eq!(partition_potential(&g, &split, Resolution::ZERO).unwrap().to_string(), "6/1");
        let grand = Partition::grand_coalition(6, 1).unwrap();
        assert_eq!(partition_potential(&g, &grand, r(1, 5)).unwrap().to_string(), "4/1");
        for gamma in [Resolution::ZERO, r(1, 2), Resolution::ONE] {
            assert_eq!(partition_potential(&g, &Partition::singletons(6), gamma).unwrap().units, 0);
        }
    }

    #[test]
    fn move_gains_from_the_comparison_table() {
        let g = kite();
        let p = Partition::from_blocks(4, &[&[0, 3], &[1], &[2]], 3).unwrap();
        let m = move_gain(&g, &p, 2, 0, r(1, 10)).unwrap();
        assert_eq!((m.delta_d, m.delta_n, m.gain().to_string()), (1, 2, "4/5".to_string()));

        let p = Partition::from_blocks(4, &[&[0, 2, 3], &[1]], 2).unwrap();
        let m = move_gain(&g, &p, 1, 0, r(1, 4)).unwrap();
        assert_eq!((m.delta_d, m.delta_n, m.gain().to_string()), (2, 3, "5/4".to_string()));
    }

    #[test]
    fn isolating_a_triangle_node() {
        let g = two_triangles();
        let grand = Partition::grand_coalition(6, 2).unwrap();
        let m = move_gain(&g, &grand, 0, 1, r(1, 2)).unwrap();
        assert_eq!((m.delta_d, m.delta_dhat, m.delta_n), (-2, -3, -5));
        assert_eq!(m.gain().to_string(), "1/2");
    }

    #[test]
    fn no_op_move_is_an_error() {
        let p = Partition::grand_coalition(4, 2).unwrap();
        assert!(matches!(move_gain(&kite(), &p, 1, 0, Resolution::ZERO), Err(Error::NoOpMove { .. })));
    }
}
