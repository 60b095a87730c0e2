//! Co-association matrices and cluster weighting.
//!
//! Covers the plain evidence-accumulation CA matrix, ensemble-driven cluster
//! entropy (the LWCA weighting), normalized ensemble entropy (NWCA), the
//! thresholded similarity matrix `S`, the high-confidence matrix `H` and its
//! graph Laplacian.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::pool::EnsemblePool;

/// How clusters are weighted when accumulating co-occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingMethod {
    /// Every cluster weighs 1 (evidence accumulation).
    Uniform,
    /// `exp(-H(C) / (λ M))` with raw ensemble entropy (LWCA).
    Eci,
    /// `exp(-NEE(C) / (λ M))` with normalized ensemble entropy (NWCA).
    Nee,
}

/// Logarithm used for the `log |π|` normalizer of NEE. The entropy itself is
/// always in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NeeLogBase {
    #[default]
    Two,
    Natural,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterWeighting {
    /// One weight per global cluster, in `(0, 1]`.
    pub weights: Vec<f64>,
    pub method: WeightingMethod,
    pub lambda: f64,
}

/// Plain co-association matrix: fraction of partitions that co-cluster each
/// pair. The diagonal is exactly 1.
pub fn build_ca(pool: &EnsemblePool) -> SymMatrix {
    let m = pool.len();
    let table = pool.global_label_table();
    let mf = m as f64;
    SymMatrix::from_lower_fn(pool.n_samples(), |i, j| {
        let (ri, rj) = (&table[i * m..(i + 1) * m], &table[j * m..(j + 1) * m]);
        let count = ri.iter().zip(rj).filter(|(a, b)| a == b).count();
        count as f64 / mf
    })
}

/// Entropy (bits) of every global cluster against the whole ensemble:
/// `H(C_i) = -Σ_j p log2 p` with `p = |C_i ∩ C_j| / |C_i|`.
pub fn cluster_entropies(pool: &EnsemblePool) -> Vec<f64> {
    let mut out = Vec::with_capacity(pool.total_clusters());
    let partitions = pool.partitions();
    for (m, part) in partitions.iter().enumerate() {
        for members in part.members() {
            let size = members.len() as f64;
            let mut h = 0.0;
            for (m2, other) in partitions.iter().enumerate() {
                if m2 == m {
                    // p is 1 for the cluster itself and 0 elsewhere.
                    continue;
                }
                let mut counts = vec![0usize; other.n_clusters()];
                for &x in &members {
                    counts[other.labels()[x]] += 1;
                }
                for &c in counts.iter().filter(|&&c| c > 0) {
                    let p = c as f64 / size;
                    h -= p * p.log2();
                }
            }
            out.push(h);
        }
    }
    out
}

pub fn cluster_entropy(pool: &EnsemblePool, c: usize) -> Result<f64> {
    check_cluster(pool, c)?;
    Ok(cluster_entropies(pool)[c])
}

fn check_cluster(pool: &EnsemblePool, c: usize) -> Result<()> {
    if c >= pool.total_clusters() {
        return Err(Error::Bounds(format!(
            "cluster {c} out of range (N_c = {})",
            pool.total_clusters()
        )));
    }
    Ok(())
}

fn normalize_entropy(h: f64, own_clusters: usize, base: NeeLogBase) -> f64 {
    if own_clusters <= 1 {
        // A single-cluster partition holds the whole sample set intact.
        return 0.0;
    }
    let denom = match base {
        NeeLogBase::Two => (own_clusters as f64).log2(),
        NeeLogBase::Natural => (own_clusters as f64).ln(),
    };
    h / denom
}

/// Normalized ensemble entropy of every global cluster.
pub fn nee_all(pool: &EnsemblePool, base: NeeLogBase) -> Vec<f64> {
    let h = cluster_entropies(pool);
    h.iter()
        .enumerate()
        .map(|(c, &hc)| {
            let own = pool.partition(pool.partition_of_cluster(c)).n_clusters();
            normalize_entropy(hc, own, base)
        })
        .collect()
}

pub fn nee(pool: &EnsemblePool, c: usize) -> Result<f64> {
    check_cluster(pool, c)?;
    Ok(nee_all(pool, NeeLogBase::Two)[c])
}

pub fn cluster_weights(
    pool: &EnsemblePool,
    method: WeightingMethod,
    lambda: f64,
) -> Result<ClusterWeighting> {
    cluster_weights_with(pool, method, lambda, NeeLogBase::Two)
}

pub fn cluster_weights_with(
    pool: &EnsemblePool,
    method: WeightingMethod,
    lambda: f64,
    base: NeeLogBase,
) -> Result<ClusterWeighting> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let scale = lambda * pool.len() as f64;
    let weights = match method {
        WeightingMethod::Uniform => vec![1.0; pool.total_clusters()],
        WeightingMethod::Eci => cluster_entropies(pool)
            .into_iter()
            .map(|h| (-h / scale).exp())
            .collect(),
        WeightingMethod::Nee => nee_all(pool, base)
            .into_iter()
            .map(|u| (-u / scale).exp())
            .collect(),
    };
    Ok(ClusterWeighting {
        weights,
        method,
        lambda,
    })
}

/// Weighted co-association: `Ã_ij = (1/M) Σ_m δ^m_ij · w(Cls^m(x_i))`.
pub fn build_weighted_ca(pool: &EnsemblePool, w: &ClusterWeighting) -> Result<SymMatrix> {
    if w.weights.len() != pool.total_clusters() {
        return Err(Error::Dimension(format!(
            "{} cluster weights for {} clusters",
            w.weights.len(),
            pool.total_clusters()
        )));
    }
    let m = pool.len();
    let table = pool.global_label_table();
    let mf = m as f64;
    Ok(SymMatrix::from_lower_fn(pool.n_samples(), |i, j| {
        let (ri, rj) = (&table[i * m..(i + 1) * m], &table[j * m..(j + 1) * m]);
        let sum: f64 = ri
            .iter()
            .zip(rj)
            .filter(|(a, b)| a == b)
            .map(|(&a, _)| w.weights[a])
            .sum();
        sum / mf
    }))
}

fn check_threshold(name: &str, t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Config(format!("{name} must lie in (0, 1), got {t}")));
    }
    Ok(())
}

/// Similarity matrix: keeps NWCA entries strictly above `eta`.
pub fn extract_similarity(nwca: &SymMatrix, eta: f64) -> Result<SymMatrix> {
    check_threshold("eta", eta)?;
    Ok(nwca.map(|v| if v > eta { v } else { 0.0 }))
}

/// High-confidence matrix: keeps CA entries at or above `theta`.
pub fn extract_high_confidence(ca: &SymMatrix, theta: f64) -> Result<SymMatrix> {
    check_threshold("theta", theta)?;
    Ok(ca.map(|v| if v >= theta { v } else { 0.0 }))
}

/// Graph Laplacian `diag(H 1) - H`.
pub fn laplacian(h: &SymMatrix) -> DMatrix<f64> {
    let n = h.order();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut degree = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            let v = h.get(i, j);
            degree += v;
            l[(i, j)] = -v;
        }
        l[(i, i)] = degree;
    }
    l
}
