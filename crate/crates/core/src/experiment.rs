//! Community-tracking sweeps over planted-partition instances.
//!
//! For every cell `(p, λ, K, η)` of an [`ExperimentGrid`] and every sample,
//! a graph is generated, its ground truth is perturbed with noise `η`, and
//! each method is started from the perturbed partition at `γ` equal to the
//! graph's edge density. Seeds are derived from `(base_seed, cell, sample)`
//! alone, so results do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{mirror, one_pass, run_dynamics, DynamicsConfig};
use crate::error::{Error, Result};
use crate::graph::{edge_density, Graph};
use crate::metrics::{mean_ci, summarize, ExperimentRecord, MeanCi, RunOutcome};
use crate::partition::Partition;
use crate::resolution::Resolution;
use crate::synthgen::{generate, perturb, NoiseSpec, SappmSpec};

/// A community detection method that starts from a given partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Local-move queue dynamics.
    DynamicsQueue,
    /// Best-response dynamics with global-best selection.
    DynamicsBest,
    OnePass,
    Mirror,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DynamicsQueue, Method::DynamicsBest, Method::OnePass, Method::Mirror];

    pub fn name(&self) -> &'static str {
        match self {
            Method::DynamicsQueue => "dynamics-queue",
            Method::DynamicsBest => "dynamics-best",
            Method::OnePass => "one-pass",
            Method::Mirror => "mirror",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown method {s:?}")))
    }
}

/// Output of [`detect`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection {
    pub partition: Partition,
    pub moves: u64,
    pub evals: u64,
}

/// Runs `method` from `start`. `config` is used by [`Method::DynamicsQueue`];
/// [`Method::DynamicsBest`] keeps its seed and empty-slot setting but forces
/// global-best selection.
pub fn detect(
    method: Method,
    graph: &Graph,
    start: &Partition,
    gamma: Resolution,
    config: &DynamicsConfig,
) -> Result<Detection> {
    match method {
        Method::DynamicsQueue | Method::DynamicsBest => {
            let config = if method == Method::DynamicsBest {
                DynamicsConfig {
                    allow_empty_target: config.allow_empty_target,
                    seed: config.seed,
                    record_trajectory: config.record_trajectory,
                    ..DynamicsConfig::global_best()
                }
            } else {
                config.clone()
            };
            let (partition, stats) = run_dynamics(graph, start, gamma, &config)?;
            Ok(Detection { partition, moves: stats.moves, evals: stats.node_evaluations })
        }
        Method::OnePass => {
            let partition = one_pass(graph, start)?;
            let moves = (0..graph.node_count())
                .filter(|&i| partition.community_of(i) != start.community_of(i))
                .count() as u64;
            Ok(Detection { partition, moves, evals: graph.node_count() as u64 })
        }
        Method::Mirror => Ok(Detection { partition: mirror(start), moves: 0, evals: 0 }),
    }
}

/// Node count of each generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceSize {
    /// `N` nodes in every community, `n = KN`.
    PerCommunity(usize),
    /// About `n` nodes in total, `N = ⌊n / K⌋`.
    Total(usize),
}

impl InstanceSize {
    pub fn per_community(&self, k: usize) -> usize {
        match *self {
            InstanceSize::PerCommunity(n) => n,
            InstanceSize::Total(n) => n / k.max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub ps: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub ks: Vec<usize>,
    pub etas: Vec<f64>,
    pub size: InstanceSize,
    pub samples: usize,
    pub methods: Vec<Method>,
    pub base_seed: u64,
}

/// One point of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub p: f64,
    pub lambda: f64,
    pub k: usize,
    pub eta: f64,
}

impl Default for ExperimentGrid {
    /// A desk-scale grid: 120 nodes, 5 samples per cell.
    fn default() -> Self {
        Self {
            ps: vec![0.05, 0.1],
            lambdas: vec![0.1, 0.4, 0.7],
            ks: vec![2, 4],
            etas: vec![0.0, 0.5, 1.0],
            size: InstanceSize::Total(120),
            samples: 5,
            methods: Method::ALL.to_vec(),
            base_seed: 0,
        }
    }
}

impl ExperimentGrid {
    /// The sweep used for the published heatmaps and tracking plots:
    /// `n = 1020`, 100 samples, `p ∈ {0.01, …, 0.10}`, ten difficulty levels,
    /// `2 ≤ K ≤ 6` and five noise levels.
    pub fn full() -> Self {
        Self {
            ps: (1..=10).map(|i| i as f64 / 100.0).collect(),
            lambdas: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75],
            ks: (2..=6).collect(),
            etas: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            size: InstanceSize::Total(1020),
            samples: 100,
            methods: Method::ALL.to_vec(),
            base_seed: 0,
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &p in &self.ps {
            for &lambda in &self.lambdas {
                for &k in &self.ks {
                    for &eta in &self.etas {
                        cells.push(Cell { p, lambda, k, eta });
                    }
                }
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidSpec("no methods selected".into()));
        }
        if self.cells().is_empty() {
            return Err(Error::InvalidSpec("the grid has no cells".into()));
        }
        for cell in self.cells() {
            let spec = SappmSpec {
                k: cell.k,
                n_per_community: self.size.per_community(cell.k),
                p: cell.p,
                lambda: cell.lambda,
                seed: 0,
            };
            spec.validate()?;
            if spec.node_count() < 2 {
                return Err(Error::InvalidSpec(format!("K = {} gives fewer than two nodes", cell.k)));
            }
            if !(0.0..=1.0).contains(&cell.eta) {
                return Err(Error::InvalidSpec(format!("eta = {} is outside [0, 1]", cell.eta)));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `sample` in cell `cell`.
pub fn sample_seed(base_seed: u64, cell: usize, sample: usize) -> u64 {
    mix(mix(mix(base_seed) ^ cell as u64) ^ sample as u64)
}

/// Runs every method on one instance.
pub fn run_instance(spec: &SappmSpec, eta: f64, methods: &[Method]) -> Result<Vec<ExperimentRecord>> {
    let (graph, truth) = generate(&SappmSpec { seed: mix(spec.seed ^ 1), ..*spec })?;
    let start = perturb(&truth, &NoiseSpec { eta, seed: mix(spec.seed ^ 2) })?;
    let gamma = edge_density(&graph)?;
    let config = DynamicsConfig { seed: mix(spec.seed ^ 3), ..DynamicsConfig::default() };
    methods
        .iter()
        .map(|&method| {
            let clock = Instant::now();
            let found = detect(method, &graph, &start, gamma, &config)?;
            let runtime = clock.elapsed();
            summarize(&RunOutcome {
                spec,
                eta,
                method: method.name(),
                graph: &graph,
                truth: &truth,
                result: &found.partition,
                moves: found.moves,
                evals: found.evals,
                runtime,
            })
        })
        .collect()
}

/// Runs the whole grid on `jobs` worker threads (all cores when `None`).
/// Records come back in (cell, sample, method) order.
pub fn run_grid(grid: &ExperimentGrid, jobs: Option<usize>) -> Result<Vec<ExperimentRecord>> {
    grid.validate()?;
    let tasks: Vec<(usize, Cell, usize)> = grid
        .cells()
        .into_iter()
        .enumerate()
        .flat_map(|(c, cell)| (0..grid.samples).map(move |s| (c, cell, s)))
        .collect();
    let work = || {
        tasks
            .par_iter()
            .map(|&(c, cell, s)| {
                let spec = SappmSpec {
                    k: cell.k,
                    n_per_community: grid.size.per_community(cell.k),
                    p: cell.p,
                    lambda: cell.lambda,
                    seed: sample_seed(grid.base_seed, c, s),
                };
                run_instance(&spec, cell.eta, &grid.methods)
            })
            .collect::<Result<Vec<_>>>()
    };
    let nested = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(nested.into_iter().flatten().collect())
}

/// Aggregate of one (K, N, p, λ, η, method) group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n_per_community: usize,
    pub p: f64,
    pub lambda: f64,
    pub eta: f64,
    pub method: String,
    pub samples: usize,
    pub robustness_mean: f64,
    pub robustness_ci95: f64,
    pub ari_mean: f64,
    pub ari_ci95: f64,
    pub moves_mean: f64,
    pub moves_ci95: f64,
    pub runtime_ms_mean: f64,
    pub runtime_ms_ci95: f64,
}

/// Groups records by cell and method and reports `mean ± 1.96·stderr`.
/// Rows are in first-appearance order.
pub fn plot_data(records: &[ExperimentRecord]) -> Vec<PlotRow> {
    type Key = (usize, usize, u64, u64, u64, String);
    let key = |r: &ExperimentRecord| -> Key {
        (r.k, r.n_per_community, r.p.to_bits(), r.lambda.to_bits(), r.eta.to_bits(), r.method.clone())
    };
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        let k = key(r);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let rows = &groups[&k];
            let ci = |f: fn(&ExperimentRecord) -> f64| -> MeanCi {
                mean_ci(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            let (rob, ari, moves, rt) =
                (ci(|r| r.robustness), ci(|r| r.ari), ci(|r| r.moves as f64), ci(|r| r.runtime_ms));
            let first = rows[0];
            PlotRow {
                k: first.k,
                n_per_community: first.n_per_community,
                p: first.p,
                lambda: first.lambda,
                eta: first.eta,
                method: first.method.clone(),
                samples: rows.len(),
                robustness_mean: rob.mean,
                robustness_ci95: rob.half_width,
                ari_mean: ari.mean,
                ari_ci95: ari.half_width,
                moves_mean: moves.mean,
                moves_ci95: moves.half_width,
                runtime_ms_mean: rt.mean,
                runtime_ms_ci95: rt.half_width,
            }
        })
        .collect()
}

pub fn write_plot_data_csv<W: Write>(rows: &[PlotRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
