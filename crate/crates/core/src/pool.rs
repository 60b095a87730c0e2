//! Base partitions, ensemble pools and the pool file format.
//!
//! Pool files are line-oriented UTF-8 text:
//!
//! ```text
//! COASSOC-POOL 1
//! n=<samples> m=<partitions> seed=<u64>
//! <label> <label> ... <label>      (one line per partition, n labels)
//! END
//! ```
//!
//! Labels are dense 0-based cluster indices. The trailing `END` line makes a
//! truncated file detectable.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const POOL_MAGIC: &str = "COASSOC-POOL";
const POOL_VERSION: u32 = 1;

/// One base clustering over `n` samples with dense labels `0..n_clusters`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    /// Wraps labels that must already be dense: every index in
    /// `0..=max(label)` needs at least one member.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let n_clusters = labels.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; n_clusters];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(Error::Format(format!(
                "cluster {empty} of {n_clusters} has no members"
            )));
        }
        Ok(Partition { labels, n_clusters })
    }

    /// Densifies arbitrary labels to `0..k` in order of first appearance.
    pub fn from_labels<T: Hash + Eq + Clone>(raw: &[T]) -> Self {
        let mut map: HashMap<T, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            n_clusters: map.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Member sample indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// `M` base partitions over the same `n` samples, plus the seed that
/// produced them. Clusters are also enumerated globally: cluster `local` of
/// partition `m` has global index `cluster_offsets[m] + local`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsemblePool {
    partitions: Vec<Partition>,
    n: usize,
    seed: u64,
    cluster_offsets: Vec<usize>,
    total_clusters: usize,
}

impl EnsemblePool {
    pub fn new(partitions: Vec<Partition>, seed: u64) -> Result<Self> {
        let first = partitions
            .first()
            .ok_or_else(|| Error::Config("ensemble pool needs at least one partition".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(Error::Config("partitions must cover at least one sample".into()));
        }
        if let Some((m, p)) = partitions.iter().enumerate().find(|(_, p)| p.len() != n) {
            return Err(Error::Dimension(format!(
                "partition {m} has {} labels, expected {n}",
                p.len()
            )));
        }
        let mut cluster_offsets = Vec::with_capacity(partitions.len());
        let mut total = 0;
        for p in &partitions {
            cluster_offsets.push(total);
            total += p.n_clusters();
        }
        Ok(EnsemblePool {
            partitions,
            n,
            seed,
            cluster_offsets,
            total_clusters: total,
        })
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn partition(&self, m: usize) -> &Partition {
        &self.partitions[m]
    }

    /// Number of base partitions `M`.
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cluster_offsets(&self) -> &[usize] {
        &self.cluster_offsets
    }

    /// Total number of clusters `N_c` across all partitions.
    pub fn total_clusters(&self) -> usize {
        self.total_clusters
    }

    pub fn global_cluster_index(&self, m: usize, local: usize) -> Result<usize> {
        let p = self.partitions.get(m).ok_or_else(|| {
            Error::Bounds(format!("partition {m} out of range (M = {})", self.len()))
        })?;
        if local >= p.n_clusters() {
            return Err(Error::Bounds(format!(
                "cluster {local} out of range for partition {m} ({} clusters)",
                p.n_clusters()
            )));
        }
        Ok(self.cluster_offsets[m] + local)
    }

    /// Partition that owns global cluster `c`.
    pub fn partition_of_cluster(&self, c: usize) -> usize {
        debug_assert!(c < self.total_clusters);
        self.cluster_offsets.partition_point(|&off| off <= c) - 1
    }

    /// Global cluster index of sample `i` in every partition, sample-major:
    /// entry `i * M + m`.
    pub fn global_label_table(&self) -> Vec<usize> {
        let m_count = self.len();
        let mut table = vec![0; self.n * m_count];
        for (m, p) in self.partitions.iter().enumerate() {
            let off = self.cluster_offsets[m];
            for (i, &l) in p.labels().iter().enumerate() {
                table[i * m_count + m] = off + l;
            }
        }
        table
    }

    /// Sizes of every global cluster.
    pub fn global_cluster_sizes(&self) -> Vec<usize> {
        self.partitions
            .iter()
            .flat_map(|p| p.cluster_sizes())
            .collect()
    }

    /// Keeps the partitions at `indices` (in the given order).
    pub fn subset(&self, indices: &[usize], seed: u64) -> Result<Self> {
        let parts = indices
            .iter()
            .map(|&i| {
                self.partitions.get(i).cloned().ok_or_else(|| {
                    Error::Bounds(format!("partition {i} out of range (M = {})", self.len()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EnsemblePool::new(parts, seed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{POOL_MAGIC} {POOL_VERSION}");
        let _ = writeln!(out, "n={} m={} seed={}", self.n, self.len(), self.seed);
        for p in &self.partitions {
            let mut first = true;
            for l in p.labels() {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{l}");
            }
            out.push('\n');
        }
        out.push_str("END\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let magic = lines
            .next()
            .ok_or_else(|| Error::Format("empty pool file".into()))?;
        let mut magic_parts = magic.split_whitespace();
        if magic_parts.next() != Some(POOL_MAGIC) {
            return Err(Error::Format("missing pool file magic".into()));
        }
        let version: u32 = magic_parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Format("unreadable pool file version".into()))?;
        if version != POOL_VERSION {
            return Err(Error::Format(format!(
                "unsupported pool file version {version} (expected {POOL_VERSION})"
            )));
        }

        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing pool header line".into()))?;
        let mut n = None;
        let mut m = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header field `{field}`")))?;
            let bad = || Error::Format(format!("bad header value `{field}`"));
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| bad())?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(Error::Format(format!("unknown header key `{key}`"))),
            }
        }
        let (n, m, seed) = match (n, m, seed) {
            (Some(n), Some(m), Some(s)) => (n, m, s),
            _ => return Err(Error::Format("pool header needs n, m and seed".into())),
        };

        let mut partitions = Vec::with_capacity(m);
        for row in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("truncated: missing partition {row}")))?;
            let labels = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Format(format!("partition {row}: non-integer label")))?;
            if labels.len() != n {
                return Err(Error::Format(format!(
                    "partition {row}: {} labels, expected {n}",
                    labels.len()
                )));
            }
            partitions.push(
                Partition::new(labels)
                    .map_err(|e| Error::Format(format!("partition {row}: {e}")))?,
            );
        }
        match lines.next() {
            Some("END") => {}
            Some(_) => return Err(Error::Format("expected END after partitions".into())),
            None => return Err(Error::Format("truncated: missing END marker".into())),
        }
        EnsemblePool::new(partitions, seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_pool() -> EnsemblePool {
        EnsemblePool::new(
            vec![
                Partition::new(vec![0, 0, 1, 1, 2, 2]).unwrap(),
                Partition::new(vec![0, 1, 1, 0, 0, 1]).unwrap(),
            ],
            42,
        )
        .unwrap()
    }

    #[test]
    fn densify_first_appearance() {
        let p = Partition::from_labels(&[7, 7, 3, 9, 3]);
        assert_eq!(p.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.n_clusters(), 3);
    }

    #[test]
    fn partition_rejects_gaps() {
        assert!(Partition::new(vec![0, 2, 2]).is_err());
    }

    #[test]
    fn global_index_examples() {
        let pool = EnsemblePool::new(
            vec![
                Partition::new(vec![0, 1, 2, 2]).unwrap(),
                Partition::new(vec![0, 0, 1, 1]).unwrap(),
            ],
            0,
        )
        .unwrap();
        assert_eq!(pool.global_cluster_index(1, 0).unwrap(), 3);
        assert_eq!(pool.global_cluster_index(0, 2).unwrap(), 2);
        assert!(matches!(pool.global_cluster_index(1, 2), Err(Error::Bounds(_))));
        assert!(matches!(pool.global_cluster_index(2, 0), Err(Error::Bounds(_))));
    }

    #[test]
    fn global_index_is_bijective() {
        let pool = toy_pool();
        let mut hit = vec![false; pool.total_clusters()];
        for m in 0..pool.len() {
            for local in 0..pool.partition(m).n_clusters() {
                let g = pool.global_cluster_index(m, local).unwrap();
                assert!(!hit[g]);
                hit[g] = true;
                assert_eq!(pool.partition_of_cluster(g), m);
            }
        }
        assert!(hit.into_iter().all(|h| h));
    }

    #[test]
    fn text_round_trip() {
        let pool = toy_pool();
        let back = EnsemblePool::from_text(&pool.to_text()).unwrap();
        assert_eq!(back, pool);
        assert_eq!(back.seed(), 42);
    }

    #[test]
    fn truncated_and_bad_version_rejected() {
        let text = toy_pool().to_text();
        let cut = &text[..text.len() - 10];
        assert!(matches!(EnsemblePool::from_text(cut), Err(Error::Format(_))));
        let no_end = text.replace("END\n", "");
        assert!(matches!(EnsemblePool::from_text(&no_end), Err(Error::Format(_))));
        let bumped = text.replace("COASSOC-POOL 1", "COASSOC-POOL 9");
        assert!(matches!(EnsemblePool::from_text(&bumped), Err(Error::Format(_))));
        assert!(matches!(EnsemblePool::from_text(""), Err(Error::Format(_))));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let r = EnsemblePool::new(
            vec![
                Partition::new(vec![0, 1]).unwrap(),
                Partition::new(vec![0, 1, 1]).unwrap(),
            ],
            0,
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
