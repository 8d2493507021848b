//! Dataset ingestion, standardization and pairwise distances.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::partition::Partition;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    BadCell {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("label column {0} not found")]
    MissingLabelColumn(String),
    #[error("need at least 2 rows, found {0}")]
    TooFewRows(usize),
    #[error("need at least 1 feature column")]
    NoFeatures,
    #[error("matrix of {rows}x{cols} needs {expected} values, got {found}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("condensed distance vector of length {0} does not match any object count")]
    CondensedLength(usize),
    #[error("invalid distance {value} at condensed index {index}")]
    BadDistance { index: usize, value: f64 },
    #[error("no blobs given")]
    EmptyBlobs,
    #[error("blob {blob}: {reason}")]
    BadBlob { blob: usize, reason: String },
}

/// Row-major `n x p` matrix of finite values; rows are objects.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    standardized: bool,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, DataError> {
        if values.len() != rows * cols {
            return Err(DataError::Shape {
                rows,
                cols,
                expected: rows * cols,
                found: values.len(),
            });
        }
        if cols == 0 {
            return Err(DataError::NoFeatures);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row: pos / cols,
                column: pos % cols,
            });
        }
        Ok(DataMatrix {
            values,
            rows,
            cols,
            standardized: false,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DataError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(row) = rows.iter().position(|r| r.len() != cols) {
            return Err(DataError::RaggedRow {
                row,
                found: rows[row].len(),
                expected: cols,
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// A single-column matrix.
    pub fn column(values: &[f64]) -> Result<Self, DataError> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Applies `f` to every row, producing a matrix of the same shape.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self, DataError> {
        let rows: Vec<Vec<f64>> = self.rows().map(&mut f).collect();
        Self::from_rows(&rows)
    }
}

/// Result of [`standardize`]: the transformed matrix plus the indices of
/// columns that had zero variance and were set to zero.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub matrix: DataMatrix,
    pub constant_columns: Vec<usize>,
}

/// Z-scores every column using the sample (n-1) standard deviation.
///
/// Constant columns become all-zero and are reported in
/// [`Standardized::constant_columns`].
pub fn standardize(m: &DataMatrix) -> Standardized {
    assert!(m.rows >= 2, "standardize needs at least 2 rows");
    let n = m.rows as f64;
    let mut values = m.values.clone();
    let mut constant_columns = Vec::new();
    for j in 0..m.cols {
        let mean = m.rows().map(|r| r[j]).sum::<f64>() / n;
        let ss = m.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>();
        let sd = (ss / (n - 1.0)).sqrt();
        // Exact zero only; any spread at all is rescaled.
        if sd == 0.0 {
            constant_columns.push(j);
        }
        for i in 0..m.rows {
            let v = &mut values[i * m.cols + j];
            *v = if sd == 0.0 { 0.0 } else { (*v - mean) / sd };
        }
    }
    Standardized {
        matrix: DataMatrix {
            values,
            rows: m.rows,
            cols: m.cols,
            standardized: true,
        },
        constant_columns,
    }
}

/// Condensed store of the `n(n-1)/2` pairwise distances.
///
/// Objects are 0-based. The pair `(i, j)` with `i < j` lives at
/// `j(j-1)/2 + i`, so entries are grouped by the larger index:
/// `(0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_condensed(d: Vec<f64>) -> Result<Self, DataError> {
        let len = d.len();
        // smallest n with n(n-1)/2 >= len
        let mut n = 1usize;
        while n * (n - 1) / 2 < len {
            n += 1;
        }
        if n * (n - 1) / 2 != len || n < 2 {
            return Err(DataError::CondensedLength(len));
        }
        if let Some(index) = d.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(DataError::BadDistance {
                index,
                value: d[index],
            });
        }
        Ok(DistanceMatrix { n, d })
    }

    /// Builds from a dense symmetric function of object pairs.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, DataError> {
        let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 1..n {
            for i in 0..j {
                d.push(f(i, j));
            }
        }
        Self::from_condensed(d)
    }

    #[inline]
    pub fn index(i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        j * (j - 1) / 2 + i
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.d[Self::index(i, j)],
            std::cmp::Ordering::Greater => self.d[Self::index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn condensed(&self) -> &[f64] {
        &self.d
    }

    /// Iterates `(i, j, d(i,j))` over `i < j` in condensed order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..self.n).flat_map(move |j| (0..j).map(move |i| (i, j, self.d[Self::index(i, j)])))
    }
}

pub fn euclidean_distances(m: &DataMatrix) -> DistanceMatrix {
    assert!(m.rows >= 2, "distances need at least 2 rows");
    let mut d = Vec::with_capacity(m.rows * (m.rows - 1) / 2);
    for j in 1..m.rows {
        let rj = m.row(j);
        for i in 0..j {
            let ss: f64 = m.row(i).iter().zip(rj).map(|(a, b)| (a - b) * (a - b)).sum();
            d.push(ss.sqrt());
        }
    }
    DistanceMatrix { n: m.rows, d }
}

/// Feature matrix with its ground-truth classification.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: DataMatrix,
    pub labels: Partition,
    /// Original class label text, indexed by dense label - 1.
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(
        features: DataMatrix,
        labels: Partition,
        class_names: Vec<String>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self, DataError> {
        if features.nrows() < 2 {
            return Err(DataError::TooFewRows(features.nrows()));
        }
        if labels.n() != features.nrows() {
            return Err(DataError::Shape {
                rows: features.nrows(),
                cols: 1,
                expected: features.nrows(),
                found: labels.n(),
            });
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_names,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.k()
    }

    /// Same dataset with standardized features; also returns constant columns.
    pub fn standardized(&self) -> (LabeledDataset, Vec<usize>) {
        let Standardized {
            matrix,
            constant_columns,
        } = standardize(&self.features);
        (
            LabeledDataset {
                features: matrix,
                ..self.clone()
            },
            constant_columns,
        )
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(s) => f.write_str(s),
        }
    }
}

pub fn load_csv(
    path: &Path,
    label: &LabelColumn,
    has_header: bool,
) -> Result<LabeledDataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, label, has_header)
}

/// Parses a labeled dataset from CSV text.
///
/// Rows and columns in error messages are 1-based and count the header
/// line, so they match what a text editor shows.
pub fn read_csv<R: Read>(
    reader: R,
    label: &LabelColumn,
    has_header: bool,
) -> Result<LabeledDataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Option<Vec<String>> = if has_header {
        let h = rdr.headers().map_err(|e| DataError::Csv(e.to_string()))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let row_offset = if has_header { 2 } else { 1 };

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.first().map(|r| r.len()))
        .unwrap_or(0);

    let label_idx = match label {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(DataError::MissingLabelColumn(i.to_string())),
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| DataError::MissingLabelColumn(name.clone()))?,
    };
    if records.len() < 2 {
        return Err(DataError::TooFewRows(records.len()));
    }
    if width < 2 {
        return Err(DataError::NoFeatures);
    }

    let mut values = Vec::with_capacity(records.len() * (width - 1));
    let mut raw_labels = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(DataError::RaggedRow {
                row: r + row_offset,
                found: rec.len(),
                expected: width,
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if c == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(DataError::BadCell {
                        row: r + row_offset,
                        column: c + 1,
                        value: cell.to_string(),
                    })
                }
            }
        }
    }

    let labels = Partition::from_labels(&raw_labels).expect("at least two rows");
    let mut class_names = vec![String::new(); labels.k()];
    for (raw, &l) in raw_labels.iter().zip(labels.labels()) {
        if class_names[l - 1].is_empty() {
            class_names[l - 1] = raw.clone();
        }
    }
    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(c, _)| *c != label_idx)
            .map(|(_, s)| s)
            .collect()
    });
    let features = DataMatrix::new(records.len(), width - 1, values)?;
    LabeledDataset::new(features, labels, class_names, feature_names)
}

/// One isotropic Gaussian component for [`generate_blobs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub center: Vec<f64>,
    pub sd: f64,
    pub count: usize,
}

/// Draws labeled points from isotropic Gaussian blobs.
///
/// The generator is ChaCha8 seeded with `seed` (via `seed_from_u64`) and
/// normal deviates come from `rand_distr::Normal`; both are portable, so a
/// seed yields bit-identical output on every platform. Points are emitted
/// blob by blob, coordinates in order, and labelled with the 1-based blob
/// index.
pub fn generate_blobs(blobs: &[Blob], seed: u64) -> Result<LabeledDataset, DataError> {
    let p = blobs.first().ok_or(DataError::EmptyBlobs)?.center.len();
    for (b, blob) in blobs.iter().enumerate() {
        let reason = if blob.count == 0 {
            Some("count must be at least 1".to_string())
        } else if !(blob.sd >= 0.0 && blob.sd.is_finite()) {
            Some(format!("sd {} must be finite and non-negative", blob.sd))
        } else if blob.center.len() != p || p == 0 {
            Some(format!("center has {} coordinates, expected {p}", blob.center.len()))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(DataError::BadBlob { blob: b + 1, reason });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (b, blob) in blobs.iter().enumerate() {
        let noise = Normal::new(0.0, blob.sd).expect("sd validated");
        for _ in 0..blob.count {
            for &c in &blob.center {
                values.push(c + noise.sample(&mut rng));
            }
            labels.push(b + 1);
        }
    }
    let n = labels.len();
    let features = DataMatrix::new(n, p, values)?;
    let labels = Partition::from_labels(&labels).expect("non-empty");
    let class_names = (1..=labels.k()).map(|b| b.to_string()).collect();
    LabeledDataset::new(features, labels, class_names, None)
}
