//! Average-linkage (UPGMA) agglomerative clustering and dendrogram cuts.
//!
//! Node ids follow the usual 1-based convention: leaves are `1..=n`,
//! the internal node created by merge `t` (0-based) is `n + 1 + t`.

use serde::Serialize;
use thiserror::Error;

use crate::data::DistanceMatrix;
use crate::partition::Partition;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("invalid k range {k_min}..={k_max} for n = {n} (need 2 <= k_min <= k_max <= n)")]
    BadRange { k_min: usize, k_max: usize, n: usize },
    #[error("partition has {found} objects, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },
}

/// One agglomeration step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Smaller of the two merged node ids.
    pub left: usize,
    /// Larger of the two merged node ids.
    pub right: usize,
    pub height: f64,
    /// Number of leaves under the new node.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }
}

/// Tolerance for the merge-height monotonicity check.
const MONOTONE_TOL: f64 = 1e-12;

/// UPGMA over a condensed distance matrix.
///
/// Each step merges the closest pair of active nodes. Inter-node distances
/// are updated with the average-linkage Lance-Williams rule
/// `D(A+B, C) = (|A| D(A,C) + |B| D(B,C)) / (|A| + |B|)`. When several
/// pairs share the minimal distance, the pair with the lexicographically
/// smallest `(smaller id, larger id)` is merged.
///
/// Runs in O(n^3) time and O(n^2) memory.
pub fn upgma(d: &DistanceMatrix) -> Dendrogram {
    let n = d.n();
    assert!(n >= 2, "upgma needs at least 2 objects");

    // Dense working matrix over slots; slot i starts as leaf i and a merged
    // node reuses the slot of its lower-slot child.
    let mut dist = vec![0.0f64; n * n];
    for (i, j, v) in d.pairs() {
        dist[i * n + j] = v;
        dist[j * n + i] = v;
    }
    let mut node_id: Vec<usize> = (1..=n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let v = dist[a * n + b];
                let key = ordered(node_id[a], node_id[b]);
                let better = match best {
                    None => true,
                    Some((bv, bkey, _, _)) => v < bv || (v == bv && key < bkey),
                };
                if better {
                    best = Some((v, key, a, b));
                }
            }
        }
        let (height, (left, right), a, b) = best.expect("at least two active nodes");
        if let Some(prev) = merges.last() {
            let prev: &Merge = prev;
            debug_assert!(
                height >= prev.height - MONOTONE_TOL,
                "non-monotone merge height {height} after {}",
                prev.height
            );
        }
        let (keep, drop) = (a.min(b), a.max(b));
        let (sk, sd) = (size[keep] as f64, size[drop] as f64);
        for &c in &active {
            if c == keep || c == drop {
                continue;
            }
            let v = (sk * dist[keep * n + c] + sd * dist[drop * n + c]) / (sk + sd);
            dist[keep * n + c] = v;
            dist[c * n + keep] = v;
        }
        size[keep] += size[drop];
        node_id[keep] = n + 1 + step;
        active.retain(|&c| c != drop);
        merges.push(Merge {
            left,
            right,
            height,
            size: size[keep],
        });
    }
    Dendrogram { n, merges }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Partition with exactly `k` clusters obtained by undoing the last `k - 1`
/// merges. Clusters are numbered by their smallest leaf.
pub fn cut_k(t: &Dendrogram, k: usize) -> Result<Partition, ClusterError> {
    let n = t.n;
    if k == 0 || k > n {
        return Err(ClusterError::KOutOfRange { k, n });
    }
    // union-find over node ids 0..2n-1 (0-based here)
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in t.merges.iter().take(n - k).enumerate() {
        let node = n + step;
        let l = find(&mut parent, m.left - 1);
        let r = find(&mut parent, m.right - 1);
        parent[l] = node;
        parent[r] = node;
    }
    let roots: Vec<usize> = (0..n).map(|leaf| find(&mut parent, leaf)).collect();
    let p = Partition::from_labels(&roots).expect("n >= 1");
    debug_assert_eq!(p.k(), k);
    Ok(p)
}

/// Where a partition in a [`PartitionSet`] came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionEntry {
    pub k: usize,
    pub algorithm: String,
    pub partition: Partition,
}

/// Ordered evaluation set of partitions over the same objects.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PartitionSet {
    entries: Vec<PartitionEntry>,
}

impl PartitionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, algorithm: impl Into<String>, partition: Partition) -> Result<(), ClusterError> {
        if let Some(first) = self.entries.first() {
            if first.partition.n() != partition.n() {
                return Err(ClusterError::SizeMismatch {
                    expected: first.partition.n(),
                    found: partition.n(),
                });
            }
        }
        self.entries.push(PartitionEntry {
            k: partition.k(),
            algorithm: algorithm.into(),
            partition,
        });
        Ok(())
    }

    pub fn entries(&self) -> &[PartitionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Object count shared by all partitions, if any.
    pub fn n(&self) -> Option<usize> {
        self.entries.first().map(|e| e.partition.n())
    }

    pub fn iter(&self) -> impl Iterator<Item = &PartitionEntry> {
        self.entries.iter()
    }
}

pub const UPGMA: &str = "upgma";

/// Cuts for every `k` in `k_min..=k_max`, in increasing `k`.
pub fn cut_range(t: &Dendrogram, k_min: usize, k_max: usize) -> Result<PartitionSet, ClusterError> {
    if k_min < 2 || k_min > k_max || k_max > t.n {
        return Err(ClusterError::BadRange { k_min, k_max, n: t.n });
    }
    let mut set = PartitionSet::new();
    for k in k_min..=k_max {
        set.push(UPGMA, cut_k(t, k)?)?;
    }
    Ok(set)
}
