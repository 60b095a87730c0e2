//! Brute-force reference implementations and random instance builders shared
//! by the integration tests. Everything here works on plain label vectors and
//! nested `Vec`s so it shares no code path with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use coassoc_core::basegen::{kmeans, KMeansConfig};
use coassoc_core::pool::{EnsemblePool, Partition};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dense labelling of `n` samples into at most `k` clusters.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let raw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    Partition::from_labels(&raw).labels().to_vec()
}

pub fn random_pool(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=n);
            random_labels(rng, n, k)
        })
        .collect()
}

pub fn to_pool(labels: &[Vec<usize>]) -> EnsemblePool {
    EnsemblePool::new(
        labels.iter().map(|l| Partition::new(l.clone()).unwrap()).collect(),
        0,
    )
    .unwrap()
}

/// Gaussian-ish blobs on a line of centres, for k-means pools.
pub fn blobs(rng: &mut ChaCha8Rng, n: usize, groups: usize) -> (DMatrix<f64>, Vec<usize>) {
    let truth: Vec<usize> = (0..n).map(|i| i % groups).collect();
    let x = DMatrix::from_fn(n, 2, |i, c| {
        let g = truth[i] as f64;
        let centre = if c == 0 { g * 4.0 } else { (g * 1.7).sin() * 4.0 };
        centre + rng.gen_range(-1.2..1.2)
    });
    (x, truth)
}

pub fn kmeans_pool(rng: &mut ChaCha8Rng, x: &DMatrix<f64>, m: usize) -> EnsemblePool {
    let n = x.nrows();
    let k_max = ((n as f64).sqrt() as usize).max(2);
    let cfg = KMeansConfig::default();
    let parts = (0..m)
        .map(|_| {
            let k = rng.gen_range(2..=k_max);
            kmeans(x, k, rng.gen(), &cfg).unwrap()
        })
        .collect();
    EnsemblePool::new(parts, 0).unwrap()
}

/// Clusters of every partition as member sets, in partition-major order,
/// with the owning partition index.
pub fn clusters(pool: &[Vec<usize>]) -> Vec<(usize, BTreeSet<usize>)> {
    let mut out = Vec::new();
    for (m, labels) in pool.iter().enumerate() {
        let k = labels.iter().max().map_or(0, |&x| x + 1);
        for c in 0..k {
            let set: BTreeSet<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            out.push((m, set));
        }
    }
    out
}

pub fn ca(pool: &[Vec<usize>]) -> Mat {
    let n = pool[0].len();
    let m = pool.len() as f64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| pool.iter().filter(|l| l[i] == l[j]).count() as f64 / m)
                .collect()
        })
        .collect()
}

/// Entropy in bits of each cluster against all clusters of the ensemble.
pub fn entropies(pool: &[Vec<usize>]) -> Vec<f64> {
    let cl = clusters(pool);
    cl.iter()
        .map(|(_, ci)| {
            let mut h = 0.0;
            for (_, cj) in &cl {
                let p = ci.intersection(cj).count() as f64 / ci.len() as f64;
                if p > 0.0 {
                    h -= p * p.log2();
                }
            }
            h
        })
        .collect()
}

pub fn nee(pool: &[Vec<usize>]) -> Vec<f64> {
    let cl = clusters(pool);
    let h = entropies(pool);
    cl.iter()
        .zip(h)
        .map(|((m, _), h)| {
            let k = pool[*m].iter().max().unwrap() + 1;
            if k <= 1 {
                0.0
            } else {
                h / (k as f64).log2()
            }
        })
        .collect()
}

pub fn nwca(pool: &[Vec<usize>], lambda: f64) -> Mat {
    let n = pool[0].len();
    let mf = pool.len() as f64;
    let u = nee(pool);
    let mut offsets = vec![0];
    for l in pool {
        offsets.push(offsets.last().unwrap() + l.iter().max().unwrap() + 1);
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = 0.0;
                    for (m, l) in pool.iter().enumerate() {
                        if l[i] == l[j] {
                            s += (-u[offsets[m] + l[i]] / (lambda * mf)).exp();
                        }
                    }
                    s / mf
                })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| (0..c).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn jaccard(pool: &[Vec<usize>]) -> Mat {
    let cl = clusters(pool);
    cl.iter()
        .map(|(_, a)| {
            cl.iter()
                .map(|(_, b)| a.intersection(b).count() as f64 / a.union(b).count() as f64)
                .collect()
        })
        .collect()
}

/// `Σ_t βᵗ (P̃ᵗ)ᵀ P̃`, evaluated term by term.
pub fn walk(pool: &[Vec<usize>], beta: f64, k: usize) -> Mat {
    let p = jaccard(pool);
    let pt: Mat = p
        .iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect();
    let nc = pt.len();
    let mut acc = vec![vec![0.0; nc]; nc];
    let mut power = pt.clone();
    for t in 1..=k {
        let term = matmul(&transpose(&power), &pt);
        let w = beta.powi(t as i32);
        for i in 0..nc {
            for j in 0..nc {
                acc[i][j] += w * term[i][j];
            }
        }
        power = matmul(&power, &pt);
    }
    acc
}

pub fn cluster_cosine(pool: &[Vec<usize>], o: &Mat) -> Mat {
    let cl = clusters(pool);
    let nc = cl.len();
    let col = |c: usize| -> Vec<f64> { o.iter().map(|row| row[c]).collect() };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (0..nc)
        .map(|a| {
            (0..nc)
                .map(|b| {
                    if cl[a].0 != cl[b].0 {
                        return 0.0;
                    }
                    let (va, vb) = (col(a), col(b));
                    let (na, nb) = (norm(&va), norm(&vb));
                    if na == 0.0 || nb == 0.0 {
                        return 0.0;
                    }
                    if a == b {
                        return 1.0;
                    }
                    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
                    (dot / (na * nb)).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect()
}

pub fn dissimilarity(pool: &[Vec<usize>], beta: f64, k: usize, tau: f64) -> Mat {
    let n = pool[0].len();
    let r = cluster_cosine(pool, &walk(pool, beta, k));
    let a = ca(pool);
    let mut offsets = vec![0];
    for l in pool {
        offsets.push(offsets.last().unwrap() + l.iter().max().unwrap() + 1);
    }
    let mf = pool.len() as f64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j || a[i][j] > 0.0 {
                        return 0.0;
                    }
                    let raw: f64 = pool
                        .iter()
                        .enumerate()
                        .map(|(m, l)| 1.0 - r[offsets[m] + l[i]][offsets[m] + l[j]])
                        .sum();
                    if raw >= tau {
                        raw / mf
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn counts<T: Ord + Clone>(xs: impl Iterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ca = counts(a.iter().copied());
    let cb = counts(b.iter().copied());
    let cab = counts(a.iter().copied().zip(b.iter().copied()));
    let h = |c: &BTreeMap<usize, usize>| -> f64 {
        c.values().map(|&x| {
            let p = x as f64 / n;
            -p * p.ln()
        }).sum()
    };
    let (ha, hb) = (h(&ca), h(&cb));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &cab {
        let pxy = c as f64 / n;
        mi += pxy * (pxy / ((ca[&x] as f64 / n) * (cb[&y] as f64 / n))).ln();
    }
    (mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0)
}

/// Pair counts `(same-same, same-diff, diff-same, diff-diff)`.
pub fn pair_counts(a: &[usize], b: &[usize]) -> (f64, f64, f64, f64) {
    let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    (ss, sd, ds, dd)
}

pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    let (ss, sd, ds, dd) = pair_counts(a, b);
    let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if denom == 0.0 {
        1.0
    } else {
        2.0 * (ss * dd - sd * ds) / denom
    }
}

pub fn pairwise_f(pred: &[usize], truth: &[usize]) -> f64 {
    let (ss, sd, ds, _) = pair_counts(pred, truth);
    let p = if ss + sd > 0.0 { ss / (ss + sd) } else { 0.0 };
    let r = if ss + ds > 0.0 { ss / (ss + ds) } else { 0.0 };
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Average-linkage agglomeration recomputing every cluster pair from the raw
/// matrix at each step. Returns the merge similarities and the labels after
/// `n - k` merges.
pub fn naive_average_linkage(w: &Mat, k: usize) -> (Vec<f64>, Vec<usize>) {
    let n = w.len();
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut sims = Vec::new();
    let mut labels_at_k = None;
    while groups.len() > 1 {
        if groups.len() == k {
            labels_at_k = Some(labels_of(&groups, n));
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let total: f64 = groups[a]
                    .iter()
                    .flat_map(|&i| groups[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| w[i][j])
                    .sum();
                let avg = total / (groups[a].len() * groups[b].len()) as f64;
                // groups stay sorted by smallest member, so (a, b) order is
                // the lexicographic order on cluster names
                if best.map_or(true, |(s, _, _)| avg > s + 1e-12) {
                    best = Some((avg, a, b));
                }
            }
        }
        let (s, a, b) = best.unwrap();
        sims.push(s);
        let moved = groups.remove(b);
        groups[a].extend(moved);
        groups[a].sort_unstable();
    }
    let labels = labels_at_k.unwrap_or_else(|| labels_of(&groups, n));
    (sims, labels)
}

fn labels_of(groups: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut l = vec![0; n];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            l[i] = g;
        }
    }
    Partition::from_labels(&l).labels().to_vec()
}

pub fn max_abs_diff(a: &Mat, b: &DMatrix<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m = m.max((v - b[(i, j)]).abs());
        }
    }
    m
}

/// Compares every library stage against the brute-force versions above on
/// one random instance with `n <= 8`, `M <= 3`. Returns a description of the
/// first mismatch.
pub fn check_oracle_case(seed: u64) -> Result<(), String> {
    use coassoc_core::ca::{build_ca, build_weighted_ca, cluster_entropies, cluster_weights, nee_all, NeeLogBase, WeightingMethod};
    use coassoc_core::dissimilarity::{dissimilarity_from_pool, WalkForm};
    use coassoc_core::metrics;

    const TOL: f64 = 1e-12;
    let mut r = rng(seed);
    let n = r.gen_range(2..=8);
    let m = r.gen_range(1..=3);
    let labels = random_pool(&mut r, n, m);
    let pool = to_pool(&labels);

    let got = build_ca(&pool).to_dense();
    let want = ca(&labels);
    if max_abs_diff(&want, &got) != 0.0 {
        return Err(format!("seed {seed}: CA differs"));
    }

    let h = cluster_entropies(&pool);
    let u = nee_all(&pool, NeeLogBase::Two);
    for (c, (hw, uw)) in entropies(&labels).into_iter().zip(nee(&labels)).enumerate() {
        if (h[c] - hw).abs() > TOL || (u[c] - uw).abs() > TOL {
            return Err(format!("seed {seed}: entropy/NEE of cluster {c}"));
        }
    }

    let lambda = r.gen_range(0.05..2.0);
    let w = cluster_weights(&pool, WeightingMethod::Nee, lambda).map_err(|e| e.to_string())?;
    let got = build_weighted_ca(&pool, &w).map_err(|e| e.to_string())?.to_dense();
    if max_abs_diff(&nwca(&labels, lambda), &got) > TOL {
        return Err(format!("seed {seed}: NWCA differs"));
    }

    let beta = r.gen_range(0.1..=1.0);
    let k = r.gen_range(1..=6);
    let tau = if r.gen_bool(0.5) { 0.0 } else { r.gen_range(0.0..1.0) };
    let a = build_ca(&pool);
    let (d, graph) = dissimilarity_from_pool(&pool, &a, beta, k, tau, WalkForm::default()).map_err(|e| e.to_string())?;
    if max_abs_diff(&jaccard(&labels), &graph.proximity) > TOL {
        return Err(format!("seed {seed}: Jaccard differs"));
    }
    let o = walk(&labels, beta, k);
    let scale = o.iter().flatten().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if max_abs_diff(&o, &graph.high_order) > TOL * scale {
        return Err(format!("seed {seed}: walk differs"));
    }
    if max_abs_diff(&cluster_cosine(&labels, &o), &graph.cluster_similarity) > 1e-9 {
        return Err(format!("seed {seed}: cluster similarity differs"));
    }
    let want = dissimilarity(&labels, beta, k, tau);
    let dd = d.to_dense();
    for i in 0..n {
        for j in 0..n {
            if (want[i][j] - dd[(i, j)]).abs() > 1e-9 {
                return Err(format!("seed {seed}: D[{i}][{j}] {} vs {}", dd[(i, j)], want[i][j]));
            }
        }
    }

    let (kp, kt) = (r.gen_range(1..=n), r.gen_range(1..=n));
    let pred = random_labels(&mut r, n, kp);
    let truth = random_labels(&mut r, n, kt);
    let (pp, tt) = (Partition::new(pred.clone()).unwrap(), Partition::new(truth.clone()).unwrap());
    let checks = [
        ("nmi", metrics::nmi(&pp, &tt).unwrap(), nmi(&pred, &truth)),
        ("ari", metrics::ari(&pp, &tt).unwrap(), ari(&pred, &truth)),
        ("f", metrics::pairwise_f(&pp, &tt).unwrap(), pairwise_f(&pred, &truth)),
    ];
    for (name, got, want) in checks {
        if (got - want).abs() > TOL {
            return Err(format!("seed {seed}: {name} {got} vs {want}"));
        }
    }
    Ok(())
}
