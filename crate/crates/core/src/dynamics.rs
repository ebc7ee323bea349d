//! Better- and best-response dynamics over a fixed number of community
//! slots, the equilibrium test, and the one-pass and mirror baselines.
//!
//! [`run_dynamics`] follows the local-move queue of the Leiden algorithm:
//! every node starts in a FIFO queue, a popped node moves to a strictly
//! improving slot if one exists, and after a move the neighbors that are not
//! in the target slot are re-queued. Because a move also changes community
//! sizes, and therefore the resolution term of non-neighbors, the queue is
//! refilled with every node and drained again until a full pass moves
//! nothing. The returned partition is then an equilibrium.
//!
//! With `γ = b/c` every improving move raises the potential by at least
//! `1/c`, and the potential ranges over an interval of width at most `2n²`,
//! so a run makes at most `2cn²` moves.
//!
//! ```
//! use hedonic::{run_dynamics, DynamicsConfig, Graph, Partition, Resolution};
//!
//! let g = Graph::complete(5);
//! let start = Partition::singletons(5);
//! let (end, stats) = run_dynamics(&g, &start, Resolution::ZERO, &DynamicsConfig::default()).unwrap();
//! assert_eq!(end.occupied_count(), 1);
//! assert_eq!(stats.moves, 4);
//! ```

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{check_compatible, neighbor_counts, Partition};
use crate::potential::{partition_potential, move_gain, MoveDeltas, MoveGain};
use crate::resolution::{Resolution, ScaledValue};

/// How a node picks its target among the improving slots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRule {
    /// A slot of maximal gain.
    #[default]
    Best,
    /// Any strictly improving slot.
    Better,
}

/// Which node moves next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// The local-move queue.
    #[default]
    Queue,
    /// The node with the largest available gain over the whole graph.
    GlobalBest,
}

/// Order in which the queue is filled at the start of every pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueInit {
    #[default]
    IdOrder,
    Shuffled,
}

/// How [`NodeRule::Better`] chooses among several improving slots.
///
/// [`NodeRule::Best`] always takes the lowest slot index among maximal gains,
/// and global-best selection always prefers the lowest node id.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Uniformly at random, from the run's seeded generator.
    Seeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub node_rule: NodeRule,
    pub selection: Selection,
    pub queue_init: QueueInit,
    pub tie_break: TieBreak,
    /// Whether a node may move into an empty slot.
    pub allow_empty_target: bool,
    pub seed: u64,
    /// Keep every applied move in [`RunStats::trajectory`].
    pub record_trajectory: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            node_rule: NodeRule::Best,
            selection: Selection::Queue,
            queue_init: QueueInit::IdOrder,
            tie_break: TieBreak::LowestIndex,
            allow_empty_target: true,
            seed: 0,
            record_trajectory: false,
        }
    }
}

impl DynamicsConfig {
    /// Best-response dynamics with global-best selection.
    pub fn global_best() -> Self {
        Self { selection: Selection::GlobalBest, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.selection == Selection::GlobalBest && self.node_rule != NodeRule::Best {
            return Err(Error::InvalidSpec("global-best selection requires the best node rule".into()));
        }
        Ok(())
    }
}

/// One applied move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub node: usize,
    pub from: usize,
    pub to: usize,
    /// `c · Δφ`; always at least 1.
    pub gain_units: i128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunStats {
    pub moves: u64,
    pub node_evaluations: u64,
    pub final_potential: ScaledValue,
    pub trajectory: Option<Vec<Step>>,
}

/// A strictly improving move available in the current partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImprovingMove {
    pub node: usize,
    pub target: usize,
    pub gain: MoveGain,
}

/// Outcome of [`is_equilibrium`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Equilibrium,
    Unstable(ImprovingMove),
}

impl Stability {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, Stability::Equilibrium)
    }

    pub fn witness(&self) -> Option<ImprovingMove> {
        match self {
            Stability::Equilibrium => None,
            Stability::Unstable(m) => Some(*m),
        }
    }
}

/// Scratch buffers for evaluating one node against every slot.
struct Evaluator {
    counts: Vec<usize>,
    touched: Vec<usize>,
    improving: Vec<(usize, i128)>,
}

impl Evaluator {
    fn new(k: usize) -> Self {
        Self { counts: vec![0; k], touched: Vec::new(), improving: Vec::new() }
    }

    /// Collects every strictly improving `(slot, gain_units)` for node `i`
    /// into `self.improving`, in increasing slot order. Among empty slots
    /// only the lowest-index one is listed, since they all give the same
    /// gain.
    fn scan(&mut self, graph: &Graph, part: &Partition, i: usize, gamma: Resolution, allow_empty: bool) {
        neighbor_counts(graph, part, i, &mut self.counts, &mut self.touched);
        let from = part.community_of(i);
        let (d_from, n_from) = (self.counts[from], part.size(from));
        self.improving.clear();
        let mut seen_empty = false;
        for k in 0..part.slot_count() {
            if k == from {
                continue;
            }
            let n_k = part.size(k);
            if n_k == 0 {
                if !allow_empty || seen_empty {
                    continue;
                }
                seen_empty = true;
            }
            let gain = MoveDeltas::from_counts(self.counts[k], d_from, n_k, n_from).gain_units(gamma);
            if gain > 0 {
                self.improving.push((k, gain));
            }
        }
        for &k in &self.touched {
            self.counts[k] = 0;
        }
        self.touched.clear();
    }

    /// Highest gain, lowest slot index on ties.
    fn best(&self) -> Option<(usize, i128)> {
        self.improving
            .iter()
            .copied()
            .fold(None, |acc, (k, g)| match acc {
                Some((_, best)) if best >= g => acc,
                _ => Some((k, g)),
            })
    }
}

/// Runs the dynamics from `start` until no node has a strictly improving move.
pub fn run_dynamics(
    graph: &Graph,
    start: &Partition,
    gamma: Resolution,
    config: &DynamicsConfig,
) -> Result<(Partition, RunStats)> {
    check_compatible(graph, start)?;
    config.validate()?;
    let mut part = start.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator::new(part.slot_count());
    let mut moves = 0u64;
    let mut evaluations = 0u64;
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let mut record = |step: Step, moves: &mut u64| {
        *moves += 1;
        if let Some(t) = trajectory.as_mut() {
            t.push(step);
        }
    };

    match config.selection {
        Selection::GlobalBest => loop {
            let mut chosen: Option<(usize, usize, i128)> = None;
            for i in 0..graph.node_count() {
                evaluations += 1;
                eval.scan(graph, &part, i, gamma, config.allow_empty_target);
                if let Some((k, g)) = eval.best() {
                    if chosen.is_none_or(|(_, _, best)| g > best) {
                        chosen = Some((i, k, g));
                    }
                }
            }
            let Some((i, to, gain_units)) = chosen else { break };
            let from = part.community_of(i);
            part.relocate(i, to);
            record(Step { node: i, from, to, gain_units }, &mut moves);
        },
        Selection::Queue => {
            let n = graph.node_count();
            let mut queue = VecDeque::with_capacity(n);
            let mut queued = vec![false; n];
            let mut order: Vec<usize> = (0..n).collect();
            loop {
                if config.queue_init == QueueInit::Shuffled {
                    order.shuffle(&mut rng);
                }
                queue.extend(order.iter().copied());
                queued.iter_mut().for_each(|q| *q = true);
                let mut changed = false;
                while let Some(i) = queue.pop_front() {
                    queued[i] = false;
                    evaluations += 1;
                    eval.scan(graph, &part, i, gamma, config.allow_empty_target);
                    let pick = match (config.node_rule, config.tie_break) {
                        (NodeRule::Best, _) => eval.best(),
                        (NodeRule::Better, TieBreak::LowestIndex) => eval.improving.first().copied(),
                        (NodeRule::Better, TieBreak::Seeded) if eval.improving.is_empty() => None,
                        (NodeRule::Better, TieBreak::Seeded) => {
                            Some(eval.improving[rng.gen_range(0..eval.improving.len())])
                        }
                    };
                    let Some((to, gain_units)) = pick else { continue };
                    let from = part.community_of(i);
                    part.relocate(i, to);
                    record(Step { node: i, from, to, gain_units }, &mut moves);
                    changed = true;
                    for &j in graph.neighbors(i) {
                        if part.community_of(j) != to && !queued[j] {
                            queued[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }

    let final_potential = partition_potential(graph, &part, gamma)?;
    Ok((part, RunStats { moves, node_evaluations: evaluations, final_potential, trajectory }))
}

/// Moves node `i` to `target` and returns the realized gain.
pub fn apply_move(
    graph: &Graph,
    part: &mut Partition,
    i: usize,
    target: usize,
    gamma: Resolution,
) -> Result<MoveGain> {
    let gain = move_gain(graph, part, i, target, gamma)?;
    part.relocate(i, target);
    Ok(gain)
}

/// Lowest-id node that has a strictly improving move, with its best target.
pub fn find_improving_move(
    graph: &Graph,
    part: &Partition,
    gamma: Resolution,
    allow_empty_target: bool,
) -> Result<Option<ImprovingMove>> {
    check_compatible(graph, part)?;
    let mut eval = Evaluator::new(part.slot_count());
    for i in 0..graph.node_count() {
        eval.scan(graph, part, i, gamma, allow_empty_target);
        if let Some((target, _)) = eval.best() {
            let gain = move_gain(graph, part, i, target, gamma)?;
            return Ok(Some(ImprovingMove { node: i, target, gain }));
        }
    }
    Ok(None)
}

/// Checks whether every node's current slot maximizes its potential over
/// all `K` slots, empty ones included.
pub fn is_equilibrium(graph: &Graph, part: &Partition, gamma: Resolution) -> Result<Stability> {
    Ok(match find_improving_move(graph, part, gamma, true)? {
        None => Stability::Equilibrium,
        Some(m) => Stability::Unstable(m),
    })
}

/// One synchronous round of neighbor-majority moves.
///
/// Every node whose neighbor count in some other slot strictly exceeds its
/// neighbor count in its own slot is sent to the slot with the most
/// neighbors (lowest index on ties). All such moves are decided against the
/// input membership and applied together.
pub fn one_pass(graph: &Graph, part: &Partition) -> Result<Partition> {
    check_compatible(graph, part)?;
    let mut counts = vec![0; part.slot_count()];
    let mut touched = Vec::new();
    let mut membership = part.membership().to_vec();
    for (i, label) in membership.iter_mut().enumerate() {
        neighbor_counts(graph, part, i, &mut counts, &mut touched);
        let own = part.community_of(i);
        let mut target: Option<(usize, usize)> = None;
        for &k in &touched {
            if k == own {
                continue;
            }
            let c = counts[k];
            let better = match target {
                None => true,
                Some((bk, bc)) => c > bc || (c == bc && k < bk),
            };
            if better {
                target = Some((k, c));
            }
        }
        if let Some((k, c)) = target {
            if c > counts[own] {
                *label = k;
            }
        }
        for &k in &touched {
            counts[k] = 0;
        }
        touched.clear();
    }
    Partition::new(membership, part.slot_count())
}

/// The identity baseline: returns its input.
pub fn mirror(part: &Partition) -> Partition {
    part.clone()
}

/// Writes a trajectory as CSV with header `step,node,from,to,gain_num,gain_den`.
/// Gains are reduced fractions.
pub fn write_trajectory_csv<W: Write>(steps: &[Step], gamma: Resolution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "node", "from", "to", "gain_num", "gain_den"])?;
    for (s, step) in steps.iter().enumerate() {
        let gain = gamma.scaled(step.gain_units).to_ratio();
        w.write_record([
            s.to_string(),
            step.node.to_string(),
            step.from.to_string(),
            step.to.to_string(),
            gain.numer().to_string(),
            gain.denom().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
