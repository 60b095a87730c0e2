//! External clustering indices and the cluster size/precision profile.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{EnsemblePool, Partition};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[r][c]`: samples in predicted cluster `r` and true class `c`.
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(pred: &Partition, truth: &Partition) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Dimension(format!(
                "{} predicted labels vs {} true labels",
                pred.len(),
                truth.len()
            )));
        }
        let (r, c) = (pred.n_clusters(), truth.n_clusters());
        let mut counts = vec![vec![0u64; c]; r];
        for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
            counts[p][t] += 1;
        }
        let row_sums = counts.iter().map(|row| row.iter().sum()).collect();
        let col_sums = (0..c).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            n: pred.len() as u64,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NmiNorm {
    #[default]
    Arithmetic,
    Max,
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn nmi(pred: &Partition, truth: &Partition) -> Result<f64> {
    nmi_with(pred, truth, NmiNorm::Arithmetic)
}

pub fn nmi_with(pred: &Partition, truth: &Partition, norm: NmiNorm) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let n = t.n as f64;
    let hp = entropy(&t.row_sums, n);
    let ht = entropy(&t.col_sums, n);
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (r, row) in t.counts.iter().enumerate() {
        for (c, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (t.row_sums[r] as f64 * t.col_sums[c] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNorm::Arithmetic => 0.5 * (hp + ht),
        NmiNorm::Max => hp.max(ht),
    };
    Ok((mi / denom).clamp(0.0, 1.0))
}

fn pairs(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

pub fn ari(pred: &Partition, truth: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let index: f64 = t.counts.iter().flatten().map(|&x| pairs(x)).sum();
    let a: f64 = t.row_sums.iter().map(|&x| pairs(x)).sum();
    let b: f64 = t.col_sums.iter().map(|&x| pairs(x)).sum();
    let total = pairs(t.n);
    let expected = if total > 0.0 { a * b / total } else { 0.0 };
    let max = 0.5 * (a + b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// F-measure over sample pairs, a pair being positive when co-clustered.
pub fn pairwise_f(pred: &Partition, truth: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let tp: f64 = t.counts.iter().flatten().map(|&x| pairs(x)).sum();
    let pred_pos: f64 = t.row_sums.iter().map(|&x| pairs(x)).sum();
    let true_pos: f64 = t.col_sums.iter().map(|&x| pairs(x)).sum();
    let p = if pred_pos > 0.0 { tp / pred_pos } else { 0.0 };
    let r = if true_pos > 0.0 { tp / true_pos } else { 0.0 };
    Ok(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub nmi: f64,
    pub ari: f64,
    pub f: f64,
}

pub fn score(pred: &Partition, truth: &Partition, norm: NmiNorm) -> Result<Scores> {
    Ok(Scores {
        nmi: nmi_with(pred, truth, norm)?,
        ari: ari(pred, truth)?,
        f: pairwise_f(pred, truth)?,
    })
}

/// Size bin `(lo, hi]` with the precision statistics of its clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBin {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
    /// `None` for an empty bin.
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

/// Bin edges `0, width, 2·width, …` covering clusters up to `max_size`.
pub fn uniform_bin_edges(width: usize, max_size: usize) -> Vec<usize> {
    let width = width.max(1);
    let mut edges = vec![0];
    while *edges.last().unwrap() < max_size {
        let next = edges.last().unwrap() + width;
        edges.push(next);
    }
    if edges.len() == 1 {
        edges.push(width);
    }
    edges
}

/// Majority-class share of every cluster in the pool, in global cluster order.
pub fn cluster_precisions(pool: &EnsemblePool, truth: &Partition) -> Result<Vec<(usize, f64)>> {
    if truth.len() != pool.n_samples() {
        return Err(Error::Dimension(format!(
            "{} true labels for {} samples",
            truth.len(),
            pool.n_samples()
        )));
    }
    let mut out = Vec::with_capacity(pool.total_clusters());
    for part in pool.partitions() {
        for members in part.members() {
            let mut tally: HashMap<usize, usize> = HashMap::new();
            for &i in &members {
                *tally.entry(truth.labels()[i]).or_default() += 1;
            }
            let top = tally.values().copied().max().unwrap_or(0);
            out.push((members.len(), top as f64 / members.len() as f64));
        }
    }
    Ok(out)
}

/// Bins cluster precision by cluster size using consecutive `edges`.
pub fn cluster_precision_profile(
    pool: &EnsemblePool,
    truth: &Partition,
    edges: &[usize],
) -> Result<Vec<PrecisionBin>> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("bin edges must be strictly increasing, at least two".into()));
    }
    let precisions = cluster_precisions(pool, truth)?;
    let mut bins = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut vals: Vec<f64> = precisions
            .iter()
            .filter(|&&(size, _)| size > lo && size <= hi)
            .map(|&(_, p)| p)
            .collect();
        vals.sort_by(f64::total_cmp);
        let count = vals.len();
        let (mean, median) = if count == 0 {
            (None, None)
        } else {
            let mean = vals.iter().sum::<f64>() / count as f64;
            let median = if count % 2 == 1 {
                vals[count / 2]
            } else {
                0.5 * (vals[count / 2 - 1] + vals[count / 2])
            };
            (Some(mean), Some(median))
        };
        bins.push(PrecisionBin {
            lo,
            hi,
            count,
            mean,
            median,
        });
    }
    Ok(bins)
}
