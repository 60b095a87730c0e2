//! Adjacency refinement and agglomerative consensus.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::pool::Partition;

/// Cluster-to-cluster similarity used when merging. Single linkage is the
/// first alternative to average when results drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

/// One agglomeration step. Clusters are named by their smallest member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub similarity: f64,
    /// Size of the merged cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    pub labels: Partition,
    pub w_star: SymMatrix,
    /// All `n - 1` merges, in order.
    pub dendrogram: Vec<Merge>,
}

impl ConsensusResult {
    /// One label per line under a `label` header.
    pub fn labels_csv(&self) -> String {
        let mut out = String::from("label\n");
        for l in self.labels.labels() {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    /// `a b similarity` per merge.
    pub fn dendrogram_text(&self) -> String {
        let mut out = String::new();
        for m in &self.dendrogram {
            let _ = writeln!(out, "{} {} {}", m.a, m.b, m.similarity);
        }
        out
    }

    pub fn write_labels(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.labels_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_dendrogram(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.dendrogram_text()).map_err(|e| Error::io(path, e))
    }
}

/// Strengthens `w` where `S* > D*` and weakens it where `S* < D*`.
pub fn refine_adjacency(w: &SymMatrix, s_star: &SymMatrix, d_star: &SymMatrix) -> Result<SymMatrix> {
    let n = w.order();
    if s_star.order() != n || d_star.order() != n {
        return Err(Error::Dimension(format!(
            "W is {n}x{n}, S* is {s}x{s}, D* is {d}x{d}",
            s = s_star.order(),
            d = d_star.order()
        )));
    }
    Ok(SymMatrix::from_lower_fn(n, |i, j| {
        refine_entry(w.get(i, j), s_star.get(i, j), d_star.get(i, j))
    }))
}

#[inline]
pub fn refine_entry(w: f64, s: f64, d: f64) -> f64 {
    let delta = s - d;
    let v = if delta >= 0.0 {
        1.0 - (1.0 - delta) * (1.0 - w)
    } else {
        (1.0 + delta) * w
    };
    v.clamp(0.0, 1.0)
}

/// Agglomerates to `k` clusters by repeatedly merging the most similar pair.
/// Ties go to the lexicographically smallest pair of cluster names. The
/// returned dendrogram continues to a single cluster.
pub fn agglomerate(w: &SymMatrix, k: usize, linkage: Linkage) -> Result<ConsensusResult> {
    let n = w.order();
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot form {k} clusters from {n} samples")));
    }
    let dendrogram = merge_all(w, linkage);
    let labels = cut(n, &dendrogram, k);
    Ok(ConsensusResult {
        labels,
        w_star: w.clone(),
        dendrogram,
    })
}

/// Labels after applying the first `n - k` merges of `dendrogram`.
pub fn cut(n: usize, dendrogram: &[Merge], k: usize) -> Partition {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in dendrogram.iter().take(n.saturating_sub(k)) {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Partition::from_labels(&roots)
}

#[derive(Clone, Copy)]
struct Best {
    sim: f64,
    partner: usize,
}

const NONE: Best = Best {
    sim: f64::NEG_INFINITY,
    partner: usize::MAX,
};

fn better(sim: f64, partner: usize, than: Best) -> bool {
    sim > than.sim || (sim == than.sim && partner < than.partner)
}

fn merge_all(w: &SymMatrix, linkage: Linkage) -> Vec<Merge> {
    let n = w.order();
    let mut sim = vec![0.0; n * n];
    for (i, j, v) in w.iter_lower() {
        sim[i * n + j] = v;
        sim[j * n + i] = v;
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];

    // best[i] is the most similar active j > i.
    let scan = |sim: &[f64], active: &[bool], i: usize| {
        let mut b = NONE;
        for j in i + 1..n {
            if active[j] && better(sim[i * n + j], j, b) {
                b = Best {
                    sim: sim[i * n + j],
                    partner: j,
                };
            }
        }
        b
    };
    let mut best: Vec<Best> = (0..n).map(|i| scan(&sim, &active, i)).collect();

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut a = usize::MAX;
        let mut top = NONE;
        for i in 0..n {
            if active[i] && best[i].partner != usize::MAX && better(best[i].sim, i, Best { sim: top.sim, partner: a }) {
                top = best[i];
                a = i;
            }
        }
        let b = top.partner;
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        active[b] = false;
        for x in 0..n {
            if !active[x] || x == a {
                continue;
            }
            let (va, vb) = (sim[a * n + x], sim[b * n + x]);
            let v = match linkage {
                Linkage::Average => (sa * va + sb * vb) / (sa + sb),
                Linkage::Single => va.max(vb),
                Linkage::Complete => va.min(vb),
            };
            sim[a * n + x] = v;
            sim[x * n + a] = v;
        }
        size[a] += size[b];
        merges.push(Merge {
            a,
            b,
            similarity: top.sim,
            size: size[a],
        });

        best[a] = scan(&sim, &active, a);
        for i in 0..a {
            if !active[i] {
                continue;
            }
            if best[i].partner == a || best[i].partner == b {
                best[i] = scan(&sim, &active, i);
            } else if better(sim[i * n + a], a, best[i]) {
                best[i] = Best {
                    sim: sim[i * n + a],
                    partner: a,
                };
            }
        }
        for i in a + 1..b {
            if active[i] && best[i].partner == b {
                best[i] = scan(&sim, &active, i);
            }
        }
    }
    merges
}
