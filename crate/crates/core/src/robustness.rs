//! Which partitions stay equilibria as the resolution changes.
//!
//! A move from slot `B` to slot `A` changes the mover's friend count by
//! `Δd`, its stranger count by `Δd̂`, and has gain `Δd - γ Δn` where
//! `Δn = Δd + Δd̂`. The gain is linear in `γ`, so each candidate move either
//! has the same sign for every `γ ∈ [0, 1]` or changes sign at the critical
//! value `γ* = Δd / Δn`. The set of resolutions at which a partition is an
//! equilibrium is therefore an intersection of half-lines, i.e. one interval.
//!
//! A node is robust when its own slot maximizes friends and minimizes
//! strangers at the same time; such a node is content for every `γ`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{check_compatible, neighbor_counts, Partition};
use crate::potential::{move_gain, MoveDeltas, MoveGain};
use crate::resolution::{fraction_string, Resolution};

/// Per-node deltas for every alternative slot, visiting only the first
/// empty slot.
fn for_each_alternative(
    graph: &Graph,
    part: &Partition,
    mut visit: impl FnMut(usize, MoveDeltas),
) -> Result<()> {
    check_compatible(graph, part)?;
    let mut counts = vec![0; part.slot_count()];
    let mut touched = Vec::new();
    let first_empty = part.first_empty_slot();
    for i in 0..graph.node_count() {
        neighbor_counts(graph, part, i, &mut counts, &mut touched);
        let from = part.community_of(i);
        for k in 0..part.slot_count() {
            if k == from || (part.size(k) == 0 && Some(k) != first_empty) {
                continue;
            }
            visit(i, MoveDeltas::from_counts(counts[k], counts[from], part.size(k), part.size(from)));
        }
        for &k in &touched {
            counts[k] = 0;
        }
        touched.clear();
    }
    Ok(())
}

/// True iff no alternative slot offers node `i` more friends or fewer strangers.
pub fn node_is_robust(graph: &Graph, part: &Partition, i: usize) -> Result<bool> {
    graph.check_node(i)?;
    Ok(robust_nodes(graph, part)?[i])
}

/// Robustness flag of every node.
pub fn robust_nodes(graph: &Graph, part: &Partition) -> Result<Vec<bool>> {
    let mut robust = vec![true; graph.node_count()];
    for_each_alternative(graph, part, |i, m| {
        if m.delta_d > 0 || m.delta_dhat < 0 {
            robust[i] = false;
        }
    })?;
    Ok(robust)
}

/// Fraction of robust nodes. An empty graph counts as fully robust.
pub fn partition_robustness(graph: &Graph, part: &Partition) -> Result<Ratio<i64>> {
    let flags = robust_nodes(graph, part)?;
    if flags.is_empty() {
        return Ok(Ratio::from_integer(1));
    }
    let robust = flags.iter().filter(|&&r| r).count();
    Ok(Ratio::new(robust as i64, flags.len() as i64))
}

/// Every node robust, equivalently an equilibrium for every `γ ∈ [0, 1]`.
pub fn is_fully_robust(graph: &Graph, part: &Partition) -> Result<bool> {
    Ok(robust_nodes(graph, part)?.into_iter().all(|r| r))
}

/// All slots occupied and of equal size.
pub fn is_balanced(part: &Partition) -> bool {
    let sizes = part.sizes();
    sizes.first().is_some_and(|&s| s > 0 && sizes.iter().all(|&x| x == s))
}

/// The Familiarity Index `Δd / (Δd + Δd̂)` of a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Familiarity {
    Finite(Ratio<i64>),
    /// `Δn = 0`: the gain is `Δd` whatever the resolution.
    Undefined,
}

impl Familiarity {
    pub fn from_deltas(m: MoveDeltas) -> Self {
        if m.delta_n == 0 {
            Familiarity::Undefined
        } else {
            Familiarity::Finite(Ratio::new(m.delta_d, m.delta_n))
        }
    }

    pub fn value(&self) -> Option<Ratio<i64>> {
        match self {
            Familiarity::Finite(r) => Some(*r),
            Familiarity::Undefined => None,
        }
    }
}

impl fmt::Display for Familiarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Familiarity::Finite(r) => f.write_str(&fraction_string(r)),
            Familiarity::Undefined => f.write_str("none"),
        }
    }
}

/// Familiarity Index of moving node `i` to `target`.
pub fn familiarity(graph: &Graph, part: &Partition, i: usize, target: usize) -> Result<Familiarity> {
    let m = move_gain(graph, part, i, target, Resolution::ZERO)?;
    Ok(Familiarity::from_deltas(m.deltas()))
}

/// How the sign of a move's gain depends on `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveClass {
    /// `Δd ≥ 0`, `Δd̂ ≤ 0`: no worse at any resolution.
    AlwaysPreferred,
    /// `Δd ≤ 0`, `Δd̂ ≥ 0`: no better at any resolution.
    NeverPreferred,
    /// More friends and more strangers: improving iff `γ < γ*`.
    FrustratedGainBelow(Ratio<i64>),
    /// Fewer friends and fewer strangers: improving iff `γ > γ*`.
    FrustratedGainAbove(Ratio<i64>),
    /// `Δd = Δd̂ = 0`.
    Neutral,
}

impl MoveClass {
    pub fn is_frustrated(&self) -> bool {
        matches!(self, MoveClass::FrustratedGainBelow(_) | MoveClass::FrustratedGainAbove(_))
    }

    pub fn threshold(&self) -> Option<Ratio<i64>> {
        match self {
            MoveClass::FrustratedGainBelow(r) | MoveClass::FrustratedGainAbove(r) => Some(*r),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            MoveClass::AlwaysPreferred => "always-preferred",
            MoveClass::NeverPreferred => "never-preferred",
            MoveClass::FrustratedGainBelow(_) => "frustrated-gain-below",
            MoveClass::FrustratedGainAbove(_) => "frustrated-gain-above",
            MoveClass::Neutral => "neutral",
        }
    }
}

impl fmt::Display for MoveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.threshold() {
            Some(t) => write!(f, "{}({})", self.tag(), fraction_string(&t)),
            None => f.write_str(self.tag()),
        }
    }
}

pub fn classify_move(m: MoveDeltas) -> MoveClass {
    let (dd, dh) = (m.delta_d, m.delta_dhat);
    match (dd.cmp(&0), dh.cmp(&0)) {
        (Ordering::Equal, Ordering::Equal) => MoveClass::Neutral,
        (Ordering::Greater, Ordering::Greater) => MoveClass::FrustratedGainBelow(Ratio::new(dd, dd + dh)),
        (Ordering::Less, Ordering::Less) => MoveClass::FrustratedGainAbove(Ratio::new(dd, dd + dh)),
        (d, h) if d != Ordering::Less && h != Ordering::Greater => MoveClass::AlwaysPreferred,
        _ => MoveClass::NeverPreferred,
    }
}

impl MoveGain {
    pub fn classify(&self) -> MoveClass {
        classify_move(self.deltas())
    }
}

/// A closed sub-interval of `[0, 1]`, possibly empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GammaInterval {
    bounds: Option<(Ratio<i64>, Ratio<i64>)>,
}

impl GammaInterval {
    pub const EMPTY: GammaInterval = GammaInterval { bounds: None };

    pub fn full() -> Self {
        Self::new(Ratio::from_integer(0), Ratio::from_integer(1))
    }

    /// `[lo, hi]` clipped to `[0, 1]`; empty when `lo > hi`.
    pub fn new(lo: Ratio<i64>, hi: Ratio<i64>) -> Self {
        let lo = lo.max(Ratio::from_integer(0));
        let hi = hi.min(Ratio::from_integer(1));
        Self { bounds: (lo <= hi).then_some((lo, hi)) }
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn lo(&self) -> Option<Ratio<i64>> {
        self.bounds.map(|b| b.0)
    }

    pub fn hi(&self) -> Option<Ratio<i64>> {
        self.bounds.map(|b| b.1)
    }

    pub fn is_point(&self) -> bool {
        self.bounds.is_some_and(|(lo, hi)| lo == hi)
    }

    pub fn contains(&self, gamma: Resolution) -> bool {
        let g = gamma.as_ratio();
        self.bounds.is_some_and(|(lo, hi)| lo <= g && g <= hi)
    }

    pub fn midpoint(&self) -> Option<Resolution> {
        let (lo, hi) = self.bounds?;
        Resolution::from_ratio((lo + hi) / 2).ok()
    }

    pub fn intersect(&self, other: &GammaInterval) -> GammaInterval {
        match (self.bounds, other.bounds) {
            (Some((a, b)), Some((c, d))) => GammaInterval::new(a.max(c), b.min(d)),
            _ => GammaInterval::EMPTY,
        }
    }
}

/// `"lo .. hi"` with both ends as fractions, or `"empty"`.
impl fmt::Display for GammaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bounds {
            Some((lo, hi)) => write!(f, "{} .. {}", fraction_string(&lo), fraction_string(&hi)),
            None => f.write_str("empty"),
        }
    }
}

impl Serialize for GammaInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Bounds {
            lo: String,
            hi: String,
        }
        self.bounds
            .map(|(lo, hi)| Bounds { lo: fraction_string(&lo), hi: fraction_string(&hi) })
            .serialize(s)
    }
}

/// Exact set of `γ ∈ [0, 1]` at which `part` is an equilibrium, with every
/// slot (empty ones included) available as a target.
pub fn equilibrium_gamma_range(graph: &Graph, part: &Partition) -> Result<GammaInterval> {
    let mut lo = Ratio::from_integer(0);
    let mut hi = Ratio::from_integer(1);
    let mut infeasible = false;
    for_each_alternative(graph, part, |_, m| match m.delta_n.cmp(&0) {
        Ordering::Greater => lo = lo.max(Ratio::new(m.delta_d, m.delta_n)),
        Ordering::Less => hi = hi.min(Ratio::new(m.delta_d, m.delta_n)),
        Ordering::Equal => infeasible |= m.delta_d > 0,
    })?;
    Ok(if infeasible { GammaInterval::EMPTY } else { GammaInterval::new(lo, hi) })
}

/// Robustness summary of one partition, serializable to JSON.
#[derive(Clone, Debug, Serialize)]
pub struct RobustnessReport {
    pub nodes: usize,
    pub slots: usize,
    pub robust: Vec<bool>,
    pub robust_count: usize,
    pub robustness: String,
    pub robustness_value: f64,
    pub fully_robust: bool,
    pub gamma_range: GammaInterval,
}

impl RobustnessReport {
    pub fn new(graph: &Graph, part: &Partition) -> Result<Self> {
        let robust = robust_nodes(graph, part)?;
        let fraction = partition_robustness(graph, part)?;
        let robust_count = robust.iter().filter(|&&r| r).count();
        Ok(Self {
            nodes: graph.node_count(),
            slots: part.slot_count(),
            robust_count,
            fully_robust: robust_count == robust.len(),
            robust,
            robustness: fraction_string(&fraction),
            robustness_value: *fraction.numer() as f64 / *fraction.denom() as f64,
            gamma_range: equilibrium_gamma_range(graph, part)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::from)
    }
}
