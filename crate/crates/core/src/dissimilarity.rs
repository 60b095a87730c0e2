//! Dissimilarity between never co-clustered samples, derived from random-walk
//! proximity in the cluster graph.
//!
//! Clusters of the whole ensemble form a graph weighted by Jaccard overlap.
//! A `k`-step walk over its row-normalized transition matrix gives each
//! cluster a high-order profile; clusters from the same base partition are
//! then compared by cosine similarity of their profiles. A sample pair that
//! no partition co-clusters gets dissimilarity equal to the mean of
//! `1 - similarity` between the clusters that hold the two samples.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::pool::EnsemblePool;

/// How each walk term combines powers of the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WalkForm {
    /// `Σ_t βᵗ (P̃ᵗ)ᵀ P̃`.
    #[default]
    TransposedPowerTimesStep,
    /// `Σ_t βᵗ (P̃ᵗ)ᵀ P̃ᵗ`, kept for sensitivity checks.
    MatchedPowers,
}

/// Every intermediate of the cluster-graph walk.
#[derive(Debug, Clone)]
pub struct ClusterGraph {
    pub proximity: DMatrix<f64>,
    pub transition: DMatrix<f64>,
    pub high_order: DMatrix<f64>,
    pub cluster_similarity: DMatrix<f64>,
    pub beta: f64,
    pub k_steps: usize,
}

impl ClusterGraph {
    pub fn build(pool: &EnsemblePool, beta: f64, k_steps: usize, form: WalkForm) -> Result<Self> {
        let proximity = jaccard_proximity(pool);
        let transition = transition_matrix(&proximity)?;
        let high_order = high_order_proximity(&transition, beta, k_steps, form)?;
        let cluster_similarity = cluster_similarity(&high_order, pool)?;
        Ok(ClusterGraph {
            proximity,
            transition,
            high_order,
            cluster_similarity,
            beta,
            k_steps,
        })
    }
}

/// Jaccard overlap of the member sets of every pair of global clusters.
pub fn jaccard_proximity(pool: &EnsemblePool) -> DMatrix<f64> {
    let nc = pool.total_clusters();
    let m = pool.len();
    let table = pool.global_label_table();
    let sizes = pool.global_cluster_sizes();
    let mut inter = vec![0u32; nc * nc];
    for row in table.chunks_exact(m) {
        for &a in row {
            for &b in row {
                inter[a * nc + b] += 1;
            }
        }
    }
    DMatrix::from_fn(nc, nc, |a, b| {
        let i = inter[a * nc + b] as f64;
        let union = (sizes[a] + sizes[b]) as f64 - i;
        i / union
    })
}

/// Row-normalizes a nonnegative proximity matrix into a transition matrix.
pub fn transition_matrix(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = p.clone();
    for (r, mut row) in out.row_iter_mut().enumerate() {
        let sum: f64 = row.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::Numeric(format!("row {r} of the proximity matrix sums to {sum}")));
        }
        row /= sum;
    }
    Ok(out)
}

/// Accumulated `k`-step proximity, weighting step `t` by `βᵗ`.
pub fn high_order_proximity(
    pt: &DMatrix<f64>,
    beta: f64,
    k: usize,
    form: WalkForm,
) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Config(format!("beta must lie in [0, 1], got {beta}")));
    }
    if k == 0 {
        return Err(Error::Config("walk length must be at least 1".into()));
    }
    let nc = pt.nrows();
    let mut power = pt.clone();
    let mut weight = beta;
    match form {
        WalkForm::TransposedPowerTimesStep => {
            // Σ βᵗ (P̃ᵗ)ᵀ P̃ = (Σ βᵗ P̃ᵗ)ᵀ P̃
            let mut power_sum = DMatrix::zeros(nc, nc);
            for t in 1..=k {
                power_sum += &power * weight;
                if t < k {
                    power = &power * pt;
                    weight *= beta;
                }
            }
            Ok(power_sum.tr_mul(pt))
        }
        WalkForm::MatchedPowers => {
            let mut acc = DMatrix::zeros(nc, nc);
            for t in 1..=k {
                acc += power.tr_mul(&power) * weight;
                if t < k {
                    power = &power * pt;
                    weight *= beta;
                }
            }
            Ok(acc)
        }
    }
}

/// Cosine similarity between high-order profiles (columns of `o`) of
/// clusters that share a base partition; zero across partitions. A zero
/// column has similarity 0 with everything, itself included.
pub fn cluster_similarity(o: &DMatrix<f64>, pool: &EnsemblePool) -> Result<DMatrix<f64>> {
    let nc = pool.total_clusters();
    if o.ncols() != nc {
        return Err(Error::Dimension(format!(
            "high-order matrix has {} columns for {nc} clusters",
            o.ncols()
        )));
    }
    let norms: Vec<f64> = o.column_iter().map(|c| c.norm()).collect();
    let mut r = DMatrix::zeros(nc, nc);
    for (m, part) in pool.partitions().iter().enumerate() {
        let off = pool.cluster_offsets()[m];
        let k = part.n_clusters();
        for a in off..off + k {
            if norms[a] == 0.0 {
                continue;
            }
            r[(a, a)] = 1.0;
            for b in off..a {
                if norms[b] == 0.0 {
                    continue;
                }
                let cos = o.column(a).dot(&o.column(b)) / (norms[a] * norms[b]);
                let cos = cos.clamp(0.0, 1.0);
                r[(a, b)] = cos;
                r[(b, a)] = cos;
            }
        }
    }
    Ok(r)
}

/// Dissimilarity matrix over sample pairs with zero co-association.
///
/// `raw_ij = Σ_m (1 - r[u_m, v_m])` where `u_m`, `v_m` are the global
/// clusters of samples `i` and `j` in partition `m`. The entry is `raw / M`
/// when `raw >= tau`, else 0. Co-associated pairs and the diagonal are 0.
pub fn build_dissimilarity(
    pool: &EnsemblePool,
    r: &DMatrix<f64>,
    ca: &SymMatrix,
    tau: f64,
) -> Result<SymMatrix> {
    let n = pool.n_samples();
    let nc = pool.total_clusters();
    if r.nrows() != nc || r.ncols() != nc {
        return Err(Error::Dimension(format!(
            "cluster similarity is {}x{}, expected {nc}x{nc}",
            r.nrows(),
            r.ncols()
        )));
    }
    if ca.order() != n {
        return Err(Error::Dimension(format!(
            "co-association order {} for {n} samples",
            ca.order()
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("tau must be nonnegative, got {tau}")));
    }
    let m = pool.len();
    let mf = m as f64;
    let table = pool.global_label_table();
    Ok(SymMatrix::from_lower_fn(n, |i, j| {
        if i == j || ca.get(i, j) > 0.0 {
            return 0.0;
        }
        let (ri, rj) = (&table[i * m..(i + 1) * m], &table[j * m..(j + 1) * m]);
        let raw: f64 = ri.iter().zip(rj).map(|(&u, &v)| 1.0 - r[(u, v)]).sum();
        if raw >= tau {
            raw / mf
        } else {
            0.0
        }
    }))
}

/// Full chain from a pool to `D`, returning the walk intermediates as well.
pub fn dissimilarity_from_pool(
    pool: &EnsemblePool,
    ca: &SymMatrix,
    beta: f64,
    k_steps: usize,
    tau: f64,
    form: WalkForm,
) -> Result<(SymMatrix, ClusterGraph)> {
    let graph = ClusterGraph::build(pool, beta, k_steps, form)?;
    let d = build_dissimilarity(pool, &graph.cluster_similarity, ca, tau)?;
    Ok((d, graph))
}
