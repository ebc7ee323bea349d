//! Partition agreement and per-run experiment records.

use std::collections::HashMap;
use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::robustness::partition_robustness;
use crate::synthgen::SappmSpec;

/// Overlap counts `n_kl = |C_k ∩ C*_l|` between two labelings of the same
/// nodes. Rows and columns are the distinct labels in order of first
/// appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn from_labels(left: &[usize], right: &[usize]) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::LengthMismatch { left: left.len(), right: right.len() });
        }
        let mut rows = HashMap::new();
        let mut cols = HashMap::new();
        let mut counts: Vec<Vec<u64>> = Vec::new();
        let mut col_count = 0;
        for (&l, &r) in left.iter().zip(right) {
            let next_row = rows.len();
            let row = *rows.entry(l).or_insert(next_row);
            if row == counts.len() {
                counts.push(Vec::new());
            }
            let next_col = cols.len();
            let col = *cols.entry(r).or_insert(next_col);
            col_count = col_count.max(col + 1);
            if counts[row].len() <= col {
                counts[row].resize(col + 1, 0);
            }
            counts[row][col] += 1;
        }
        for row in &mut counts {
            row.resize(col_count, 0);
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..col_count).map(|c| counts.iter().map(|r| r[c]).sum()).collect();
        Ok(Self { counts, row_sums, col_sums, total: left.len() as u64 })
    }

    pub fn new(part: &Partition, reference: &Partition) -> Result<Self> {
        Self::from_labels(part.membership(), reference.membership())
    }
}

fn pairs(x: u64) -> u128 {
    let x = x as u128;
    x * x.saturating_sub(1) / 2
}

/// Adjusted Rand Index of two partitions of the same node set.
pub fn ari(part: &Partition, reference: &Partition) -> Result<f64> {
    ari_labels(part.membership(), reference.membership())
}

/// [`ari`] on raw label sequences.
///
/// When the chance-corrected denominator vanishes (both labelings are all
/// singletons, or both are one block) the result is 1 for identical
/// groupings and 0 otherwise. Fewer than two nodes score 1.
pub fn ari_labels(left: &[usize], right: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(left, right)?;
    if table.total < 2 {
        return Ok(1.0);
    }
    let index: u128 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let a: u128 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let b: u128 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let total = pairs(table.total);
    let numerator = 2 * (index * total) as i128 - 2 * (a * b) as i128;
    let denominator = ((a + b) * total) as i128 - 2 * (a * b) as i128;
    if denominator == 0 {
        let same = crate::partition::canonical_labels(left) == crate::partition::canonical_labels(right);
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}

/// One row of the experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n_per_community: usize,
    pub p: f64,
    pub lambda: f64,
    pub eta: f64,
    pub method: String,
    pub moves: u64,
    pub evals: u64,
    pub runtime_ms: f64,
    pub robustness: f64,
    pub ari: f64,
}

/// Everything [`summarize`] needs about a finished run.
#[derive(Clone, Copy, Debug)]
pub struct RunOutcome<'a> {
    pub spec: &'a SappmSpec,
    pub eta: f64,
    pub method: &'a str,
    pub graph: &'a Graph,
    pub truth: &'a Partition,
    pub result: &'a Partition,
    pub moves: u64,
    pub evals: u64,
    pub runtime: Duration,
}

/// Scores a run: robustness of the output partition and its ARI against the
/// ground truth.
pub fn summarize(outcome: &RunOutcome<'_>) -> Result<ExperimentRecord> {
    let robustness = partition_robustness(outcome.graph, outcome.result)?;
    Ok(ExperimentRecord {
        seed: outcome.spec.seed,
        k: outcome.spec.k,
        n_per_community: outcome.spec.n_per_community,
        p: outcome.spec.p,
        lambda: outcome.spec.lambda,
        eta: outcome.eta,
        method: outcome.method.to_string(),
        moves: outcome.moves,
        evals: outcome.evals,
        runtime_ms: outcome.runtime.as_secs_f64() * 1e3,
        robustness: *robustness.numer() as f64 / *robustness.denom() as f64,
        ari: ari(outcome.result, outcome.truth)?,
    })
}

/// Writes records with a header row.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "seed", "K", "N", "p", "lambda", "eta", "method", "moves", "evals", "runtime_ms", "robustness", "ari",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Sample mean with a normal-approximation 95% interval, `mean ± 1.96·stderr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub count: usize,
}

pub fn mean_ci(values: &[f64]) -> MeanCi {
    let count = values.len();
    if count == 0 {
        return MeanCi { mean: f64::NAN, half_width: f64::NAN, count };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    if count == 1 {
        return MeanCi { mean, half_width: 0.0, count };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
    MeanCi { mean, half_width: 1.96 * (var / count as f64).sqrt(), count }
}
