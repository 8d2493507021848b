//! Hard partitions of `n` objects into `k` labeled groups.
//!
//! Both clusterings and ground-truth classifications use [`Partition`].
//! Labels are dense: every label in `1..=k` occurs at least once.

use std::collections::HashMap;
use std::hash::Hash;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("partition is empty")]
    Empty,
    #[error("label {label} at object {object} is outside 1..={k}")]
    LabelOutOfRange { object: usize, label: usize, k: usize },
    #[error("label {0} never occurs")]
    MissingLabel(usize),
    #[error("partition csv: {0}")]
    Csv(String),
    #[error("partition csv row {row}: {reason}")]
    BadRow { row: usize, reason: String },
}

/// Assignment of each object to a cluster label in `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    assign: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Builds a partition from labels already in `1..=k` with every label used.
    pub fn new(assign: Vec<usize>) -> Result<Self, PartitionError> {
        if assign.is_empty() {
            return Err(PartitionError::Empty);
        }
        let k = *assign.iter().max().expect("non-empty");
        let mut seen = vec![false; k + 1];
        for (object, &label) in assign.iter().enumerate() {
            if label == 0 {
                return Err(PartitionError::LabelOutOfRange { object, label, k });
            }
            seen[label] = true;
        }
        if let Some(missing) = (1..=k).find(|&l| !seen[l]) {
            return Err(PartitionError::MissingLabel(missing));
        }
        Ok(Partition { assign, k })
    }

    /// Maps arbitrary labels onto `1..=k` in order of first appearance.
    pub fn from_labels<T: Hash + Eq + Clone>(labels: &[T]) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::Empty);
        }
        let mut ids: HashMap<T, usize> = HashMap::new();
        let assign = labels
            .iter()
            .map(|l| {
                let next = ids.len() + 1;
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        Ok(Partition { assign, k: ids.len() })
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Per-object labels, `1..=k`.
    pub fn labels(&self) -> &[usize] {
        &self.assign
    }

    pub fn label(&self, object: usize) -> usize {
        self.assign[object]
    }

    /// Zero-based cluster index of an object, handy for indexing arrays of length `k`.
    pub fn cluster_of(&self, object: usize) -> usize {
        self.assign[object] - 1
    }

    /// Cluster sizes indexed by zero-based cluster.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.assign {
            sizes[l - 1] += 1;
        }
        sizes
    }

    /// Member lists indexed by zero-based cluster, each in increasing object order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &l) in self.assign.iter().enumerate() {
            members[l - 1].push(i);
        }
        members
    }

    /// Relabels clusters by first appearance, i.e. by smallest contained object.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.assign).expect("non-empty")
    }

    /// True when `self` and `other` group objects identically, ignoring label names.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.n() == other.n() && self.canonical().assign == other.canonical().assign
    }

    /// True when every cluster of `self` lies inside a single cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.n() != coarser.n() {
            return false;
        }
        let mut parent = vec![0usize; self.k];
        for (i, &l) in self.assign.iter().enumerate() {
            let c = coarser.assign[i];
            match parent[l - 1] {
                0 => parent[l - 1] = c,
                p if p != c => return false,
                _ => {}
            }
        }
        true
    }
}

/// Reads an externally produced clustering from `object_id,cluster` rows.
///
/// A header row is optional and detected by a non-numeric first field.
/// Object ids are 1-based and must cover `1..=n` exactly once; cluster
/// labels may be any strings and are densified by first appearance in
/// object order.
pub fn read_partition_csv<R: Read>(reader: R) -> Result<Partition, PartitionError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(usize, String)> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| PartitionError::Csv(e.to_string()))?;
        if rec.len() != 2 {
            return Err(PartitionError::BadRow {
                row: row + 1,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let id = match rec[0].parse::<usize>() {
            Ok(id) => id,
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(PartitionError::BadRow {
                    row: row + 1,
                    reason: format!("object id {:?} is not a positive integer", &rec[0]),
                })
            }
        };
        rows.push((id, rec[1].to_string()));
    }
    if rows.is_empty() {
        return Err(PartitionError::Empty);
    }
    let n = rows.len();
    let mut labels: Vec<Option<String>> = vec![None; n];
    for (row, (id, label)) in rows.into_iter().enumerate() {
        if id == 0 || id > n || labels[id - 1].is_some() {
            return Err(PartitionError::BadRow {
                row: row + 1,
                reason: format!("object id {id} is out of range or repeated"),
            });
        }
        labels[id - 1] = Some(label);
    }
    let labels: Vec<String> = labels.into_iter().map(|l| l.expect("all ids seen")).collect();
    Partition::from_labels(&labels)
}

/// Convenience wrapper around [`read_partition_csv`] for a file path.
pub fn load_partition_csv(path: &Path) -> Result<Partition, PartitionError> {
    let file = std::fs::File::open(path)
        .map_err(|e| PartitionError::Csv(format!("{}: {e}", path.display())))?;
    read_partition_csv(file)
}
