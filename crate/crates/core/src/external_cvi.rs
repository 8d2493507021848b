//! Partition similarity: the Hubert-Arabie adjusted Rand index.

use serde::Serialize;
use thiserror::Error;

use crate::partition::Partition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AriError {
    #[error("partitions cover {0} and {1} objects")]
    SizeMismatch(usize, usize),
    #[error("need at least 2 objects")]
    TooFewObjects,
    #[error("adjusted Rand index is undefined: both partitions are trivial")]
    ZeroDenominator,
}

/// Class-by-cluster co-occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    /// Rows follow the labels of `p`, columns those of `q`.
    pub fn new(p: &Partition, q: &Partition) -> Result<Self, AriError> {
        if p.n() != q.n() {
            return Err(AriError::SizeMismatch(p.n(), q.n()));
        }
        let (rows, cols) = (p.k(), q.k());
        let mut counts = vec![0u64; rows * cols];
        for (&a, &b) in p.labels().iter().zip(q.labels()) {
            counts[(a - 1) * cols + (b - 1)] += 1;
        }
        let row_sums = counts.chunks_exact(cols).map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols)
            .map(|c| (0..rows).map(|r| counts[r * cols + c]).sum())
            .collect();
        Ok(ContingencyTable {
            rows,
            cols,
            counts,
            row_sums,
            col_sums,
            n: p.n() as u64,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    /// Pair counts that enter the index.
    pub fn pair_counts(&self) -> PairCounts {
        PairCounts {
            both: self.counts.iter().map(|&c| choose2(c)).sum(),
            rows: self.row_sums.iter().map(|&c| choose2(c)).sum(),
            cols: self.col_sums.iter().map(|&c| choose2(c)).sum(),
            total: choose2(self.n),
        }
    }
}

/// Numbers of object pairs placed together in both partitions (`both`),
/// in the first (`rows`), in the second (`cols`), and overall (`total`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub both: u64,
    pub rows: u64,
    pub cols: u64,
    pub total: u64,
}

impl PairCounts {
    /// ARI from pair counts, evaluated in exact integer arithmetic up to a
    /// single final division.
    pub fn adjusted_rand(&self) -> Result<f64, AriError> {
        let (both, rows, cols, total) = (
            self.both as i128,
            self.rows as i128,
            self.cols as i128,
            self.total as i128,
        );
        // ARI = (both - rows*cols/total) / ((rows+cols)/2 - rows*cols/total),
        // scaled by 2*total on top and bottom.
        let num = 2 * (both * total - rows * cols);
        let den = (rows + cols) * total - 2 * rows * cols;
        if den == 0 {
            return Err(AriError::ZeroDenominator);
        }
        Ok(num as f64 / den as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityValue {
    pub value: f64,
    pub pairs: PairCounts,
}

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Adjusted Rand index with the pair counts it was computed from.
pub fn adjusted_rand_detail(p: &Partition, q: &Partition) -> Result<SimilarityValue, AriError> {
    if p.n() != q.n() {
        return Err(AriError::SizeMismatch(p.n(), q.n()));
    }
    if p.n() < 2 {
        return Err(AriError::TooFewObjects);
    }
    let pairs = ContingencyTable::new(p, q)?.pair_counts();
    Ok(SimilarityValue {
        value: pairs.adjusted_rand()?,
        pairs,
    })
}

pub fn adjusted_rand(p: &Partition, q: &Partition) -> Result<f64, AriError> {
    adjusted_rand_detail(p, q).map(|s| s.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(l: &[usize]) -> Partition {
        Partition::new(l.to_vec()).unwrap()
    }

    #[test]
    fn identical_is_one() {
        let p = part(&[1, 1, 2, 3, 3, 3]);
        assert_eq!(adjusted_rand(&p, &p).unwrap(), 1.0);
        let renamed = part(&[3, 3, 1, 2, 2, 2]);
        assert_eq!(adjusted_rand(&p, &renamed).unwrap(), 1.0);
    }

    #[test]
    fn crossed_halves() {
        let p = part(&[1, 1, 2, 2]);
        let q = part(&[1, 2, 1, 2]);
        let s = adjusted_rand_detail(&p, &q).unwrap();
        assert_eq!(s.pairs, PairCounts { both: 0, rows: 2, cols: 2, total: 6 });
        // (0 - 4/6) / (2 - 4/6)
        assert_eq!(s.value, -0.5);
    }

    #[test]
    fn contingency_sums() {
        let t = ContingencyTable::new(&part(&[1, 1, 2, 2, 2]), &part(&[1, 2, 2, 2, 1])).unwrap();
        assert_eq!(t.shape(), (2, 2));
        assert_eq!((t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1)), (1, 1, 1, 2));
        assert_eq!(t.row_sums(), &[2, 3]);
        assert_eq!(t.col_sums(), &[2, 3]);
        assert_eq!(t.total(), 5);
    }

    #[test]
    fn errors() {
        assert_eq!(
            adjusted_rand(&part(&[1, 2]), &part(&[1, 2, 1])),
            Err(AriError::SizeMismatch(2, 3))
        );
        assert_eq!(
            adjusted_rand(&part(&[1]), &part(&[1])),
            Err(AriError::TooFewObjects)
        );
        let one = part(&[1, 1, 1]);
        assert_eq!(adjusted_rand(&one, &one), Err(AriError::ZeroDenominator));
        let singles = part(&[1, 2, 3]);
        assert_eq!(adjusted_rand(&singles, &singles), Err(AriError::ZeroDenominator));
    }

    #[test]
    fn large_counts_do_not_overflow() {
        let n = 100_000;
        let p = Partition::from_labels(&(0..n).map(|i| i % 3).collect::<Vec<_>>()).unwrap();
        let q = Partition::from_labels(&(0..n).map(|i| i % 7).collect::<Vec<_>>()).unwrap();
        let v = adjusted_rand(&p, &q).unwrap();
        assert!(v.abs() < 1e-3);
        assert_eq!(adjusted_rand(&p, &p).unwrap(), 1.0);
    }
}
