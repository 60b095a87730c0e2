//! Base clusterings from randomized k-means.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{EnsemblePool, Partition};
use crate::seed::{derive, STREAM_KMEANS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KMeansInit {
    /// `k` distinct samples chosen uniformly.
    #[default]
    RandomSample,
    PlusPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub k_min: usize,
    /// `None` means `⌊√n⌋`.
    pub k_max: Option<usize>,
    pub max_iters: usize,
    /// Stop when `Σ‖Δc‖² / Σ‖c‖²` falls below this.
    pub tol: f64,
    pub init: KMeansInit,
    /// Z-score each feature before clustering.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k_min: 2,
            k_max: None,
            max_iters: 100,
            tol: 1e-4,
            init: KMeansInit::RandomSample,
            standardize: true,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    /// The `[k_min, k_max]` range for `n` samples.
    pub fn k_range(&self, n: usize) -> Result<(usize, usize)> {
        let k_max = self.k_max.unwrap_or_else(|| isqrt(n));
        if self.k_min < 2 || self.k_min > k_max || k_max > n {
            return Err(Error::Config(format!(
                "need 2 <= k_min <= k_max <= n, got k_min={}, k_max={k_max}, n={n}",
                self.k_min
            )));
        }
        Ok((self.k_min, k_max))
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Per-feature z-scores. Constant features become zero.
pub fn standardize(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        for v in col.iter_mut() {
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
    out
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(c.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn init_centers(x: &DMatrix<f64>, k: usize, init: KMeansInit, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    let picks: Vec<usize> = match init {
        KMeansInit::RandomSample => sample(rng, n, k).into_vec(),
        KMeansInit::PlusPlus => {
            let mut picks = vec![rng.gen_range(0..n)];
            let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(x, i, x, picks[0])).collect();
            while picks.len() < k {
                let total: f64 = dist.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.gen::<f64>() * total;
                    let mut chosen = n - 1;
                    for (i, &w) in dist.iter().enumerate() {
                        if target < w {
                            chosen = i;
                            break;
                        }
                        target -= w;
                    }
                    chosen
                } else {
                    // All remaining points coincide with a center.
                    (0..n).find(|i| !picks.contains(i)).unwrap_or(0)
                };
                picks.push(next);
                for (i, di) in dist.iter_mut().enumerate() {
                    *di = di.min(sq_dist(x, i, x, next));
                }
            }
            picks
        }
    };
    DMatrix::from_fn(k, d, |r, c| x[(picks[r], c)])
}

/// Lloyd's algorithm on the rows of `x`.
pub fn kmeans(x: &DMatrix<f64>, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<Partition> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::Config("no samples to cluster".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot form {k} clusters from {n} samples")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = init_centers(x, k, cfg.init, &mut rng);
    let mut assign = vec![0usize; n];
    let mut dist = vec![0.0f64; n];

    for _ in 0..cfg.max_iters.max(1) {
        for i in 0..n {
            let mut best = (f64::INFINITY, 0);
            for j in 0..k {
                let dd = sq_dist(x, i, &centers, j);
                if dd < best.0 {
                    best = (dd, j);
                }
            }
            dist[i] = best.0;
            assign[i] = best.1;
        }

        let mut counts = vec![0usize; k];
        for &a in &assign {
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            // Move the point farthest from its center into the empty cluster,
            // never emptying a cluster in the process.
            let far = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .fold(None, |acc: Option<usize>, i| match acc {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                });
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                assign[i] = j;
                counts[j] = 1;
                dist[i] = 0.0;
            }
        }

        let mut next = DMatrix::zeros(k, d);
        for (i, &a) in assign.iter().enumerate() {
            for c in 0..d {
                next[(a, c)] += x[(i, c)];
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let mut row = next.row_mut(j);
                row /= counts[j] as f64;
            }
        }
        let shift = (&next - &centers).norm_squared();
        let scale = next.norm_squared();
        centers = next;
        if shift <= cfg.tol * scale || shift == 0.0 {
            break;
        }
    }
    Ok(Partition::from_labels(&assign))
}

/// `count` k-means partitions with `k` uniform in the configured range.
pub fn generate_pool(features: &DMatrix<f64>, count: usize, cfg: &KMeansConfig) -> Result<EnsemblePool> {
    let n = features.nrows();
    let (k_min, k_max) = cfg.k_range(n)?;
    if count == 0 {
        return Err(Error::Config("pool must hold at least one partition".into()));
    }
    let x = if cfg.standardize {
        standardize(features)
    } else {
        features.clone()
    };
    let parts = (0..count)
        .into_par_iter()
        .map(|idx| {
            let seed = derive(cfg.seed, STREAM_KMEANS, idx as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.gen_range(k_min..=k_max);
            kmeans(&x, k, rng.gen(), cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    EnsemblePool::new(parts, cfg.seed)
}

/// Uniform draw of `m` partitions without replacement, kept in pool order.
pub fn sample_indices(pool_len: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || m > pool_len {
        return Err(Error::Config(format!("cannot draw {m} of {pool_len} partitions")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, pool_len, m).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

pub fn sample_ensemble(pool: &EnsemblePool, m: usize, seed: u64) -> Result<EnsemblePool> {
    let idx = sample_indices(pool.len(), m, seed)?;
    pool.subset(&idx, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (DMatrix<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let truth: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = DMatrix::from_fn(n, 2, |i, _| {
            let centre = if truth[i] == 0 { -10.0 } else { 10.0 };
            centre + rng.gen_range(-1.0..1.0)
        });
        (x, truth)
    }

    #[test]
    fn isqrt_floor() {
        assert_eq!(isqrt(336), 18);
        assert_eq!(isqrt(788), 28);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(15), 3);
    }

    #[test]
    fn k_one_and_k_n() {
        let (x, _) = blobs();
        let cfg = KMeansConfig::default();
        assert_eq!(kmeans(&x, 1, 0, &cfg).unwrap().n_clusters(), 1);
        assert_eq!(kmeans(&x, 60, 0, &cfg).unwrap().n_clusters(), 60);
        assert!(kmeans(&x, 61, 0, &cfg).is_err());
    }

    #[test]
    fn recovers_blobs() {
        let (x, truth) = blobs();
        for init in [KMeansInit::RandomSample, KMeansInit::PlusPlus] {
            let cfg = KMeansConfig {
                init,
                ..Default::default()
            };
            let p = kmeans(&x, 2, 11, &cfg).unwrap();
            assert_eq!(p, Partition::from_labels(&truth));
        }
    }

    #[test]
    fn empty_clusters_are_repaired() {
        // Three distinct locations, many duplicates; k=3 must give 3 clusters.
        let x = DMatrix::from_fn(9, 1, |i, _| [0.0, 5.0, 9.0][i % 3]);
        for seed in 0..20 {
            let p = kmeans(&x, 3, seed, &KMeansConfig::default()).unwrap();
            assert_eq!(p.n_clusters(), 3);
        }
    }

    #[test]
    fn pool_is_deterministic_and_in_range() {
        let (x, _) = blobs();
        let cfg = KMeansConfig {
            seed: 9,
            ..Default::default()
        };
        let a = generate_pool(&x, 12, &cfg).unwrap();
        let b = generate_pool(&x, 12, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        for p in a.partitions() {
            assert!((2..=7).contains(&p.n_clusters()), "{}", p.n_clusters());
        }
    }

    #[test]
    fn sampling() {
        assert_eq!(sample_indices(5, 5, 1).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(sample_indices(5, 6, 1).is_err());
        let a = sample_indices(100, 20, 4).unwrap();
        assert_eq!(a, sample_indices(100, 20, 4).unwrap());
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        let mut subsets: Vec<Vec<usize>> = (1..=20).map(|s| sample_indices(100, 20, s).unwrap()).collect();
        subsets.sort();
        subsets.dedup();
        assert_eq!(subsets.len(), 20);
    }

    #[test]
    fn standardized_columns() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let z = standardize(&x);
        assert!(z.column(0).sum().abs() < 1e-12);
        assert!((z.column(0).norm_squared() / 3.0 - 1.0).abs() < 1e-12);
        assert_eq!(z.column(1).sum(), 0.0);
    }
}
