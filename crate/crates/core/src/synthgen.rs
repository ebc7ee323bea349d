//! Symmetric assortative planted partitions and ground-truth perturbation.
//!
//! Nodes `b·N .. (b+1)·N` form block `b`. Each pair inside a block is an
//! edge with probability `p`, each pair across blocks with `q = λp`.
//!
//! Sampling uses ChaCha8 seeded from `seed`, with one stream per block pair
//! `(a, b)`, `a ≤ b`, numbered `a·K + b`. Pairs inside a stream are visited in
//! lexicographic order, and a pair is an edge when a uniform `f64` draw is
//! below its probability. The edge set therefore depends only on the spec.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SappmSpec {
    /// Number of blocks `K`.
    pub k: usize,
    /// Nodes per block `N`.
    pub n_per_community: usize,
    /// Intra-block edge probability.
    pub p: f64,
    /// Difficulty `λ = q / p`.
    pub lambda: f64,
    pub seed: u64,
}

impl SappmSpec {
    pub fn node_count(&self) -> usize {
        self.k * self.n_per_community
    }

    /// Inter-block probability `q = λp`.
    pub fn q(&self) -> f64 {
        self.p * self.lambda
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSpec("at least one community is required".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidSpec(format!("p = {} is outside [0, 1]", self.p)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidSpec(format!("lambda = {} is outside [0, 1]", self.lambda)));
        }
        Ok(())
    }
}

/// Samples a graph and its ground-truth partition (`K` slots).
pub fn generate(spec: &SappmSpec) -> Result<(Graph, Partition)> {
    spec.validate()?;
    let (k, size) = (spec.k, spec.n_per_community);
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a..k {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream((a * k + b) as u64);
            let prob = if a == b { spec.p } else { spec.q() };
            for x in 0..size {
                let u = a * size + x;
                let y0 = if a == b { x + 1 } else { 0 };
                for y in y0..size {
                    if rng.gen::<f64>() < prob {
                        edges.push((u, b * size + y));
                    }
                }
            }
        }
    }
    let graph = Graph::from_edges(spec.node_count(), edges)?;
    let truth = Partition::new((0..spec.node_count()).map(|i| i / size.max(1)).collect(), k)?;
    Ok((graph, truth))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Fraction of nodes whose labels are shuffled.
    pub eta: f64,
    pub seed: u64,
}

/// Number of nodes a noise level selects out of `n`.
pub fn selected_count(eta: f64, n: usize) -> usize {
    ((eta * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Picks `⌊ηn⌋` nodes uniformly without replacement and randomly permutes
/// their labels among themselves. Community sizes never change.
pub fn perturb(truth: &Partition, noise: &NoiseSpec) -> Result<Partition> {
    if !(0.0..=1.0).contains(&noise.eta) {
        return Err(Error::InvalidSpec(format!("eta = {} is outside [0, 1]", noise.eta)));
    }
    let n = truth.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let chosen = index::sample(&mut rng, n, selected_count(noise.eta, n)).into_vec();
    let mut labels: Vec<usize> = chosen.iter().map(|&i| truth.community_of(i)).collect();
    labels.shuffle(&mut rng);
    let mut membership = truth.membership().to_vec();
    for (&i, l) in chosen.iter().zip(labels) {
        membership[i] = l;
    }
    Partition::new(membership, truth.slot_count())
}
