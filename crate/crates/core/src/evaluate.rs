//! Scoring internal indices against a ground-truth classification.
//!
//! Given a set of candidate partitions, each index picks its best partition.
//! Four protocols then judge that choice:
//!
//! * **Milligan-Cooper**: success when the chosen partition has as many
//!   clusters as there are classes.
//! * **Gurrutxaga**: success when the chosen partition is (one of) the most
//!   similar to the classification.
//! * **Vendramin**: correlation between index values and similarity across
//!   all partitions.
//! * **Goodness ratio**: similarity of the chosen partition divided by the
//!   best similarity available, `S(b) / max_i S(i)`.
//!
//! Similarity is the adjusted Rand index.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::data::{euclidean_distances, LabeledDataset};
use crate::external_cvi::adjusted_rand;
use crate::hierclust::PartitionSet;
use crate::internal_cvi::{compute, Conventions, CviInput, CviKind, CviValue, Direction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("empty sequence")]
    Empty,
    #[error("index {index} out of range for {len} partitions")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sequences have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("correlation needs at least 3 partitions, got {0}")]
    TooFewPartitions(usize),
    #[error("{0} values are constant; correlation undefined")]
    Constant(&'static str),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("max similarity {0} is not positive; goodness ratio undefined")]
    NonPositiveMaxSimilarity(f64),
    #[error("partition set is empty")]
    NoPartitions,
    #[error("partitions cover {found} objects but the dataset has {expected}")]
    SizeMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

impl FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(format!("unknown correlation method {other:?}")),
        }
    }
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::Spearman => "spearman",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    MilliganCooper,
    Gurrutxaga,
    Vendramin,
    NewGoodness,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::MilliganCooper,
        Protocol::Gurrutxaga,
        Protocol::Vendramin,
        Protocol::NewGoodness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::MilliganCooper => "milligan_cooper",
            Protocol::Gurrutxaga => "gurrutxaga",
            Protocol::Vendramin => "vendramin",
            Protocol::NewGoodness => "new_goodness",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "milligan_cooper" | "mc" => Ok(Protocol::MilliganCooper),
            "gurrutxaga" => Ok(Protocol::Gurrutxaga),
            "vendramin" => Ok(Protocol::Vendramin),
            "new_goodness" | "goodness" => Ok(Protocol::NewGoodness),
            other => Err(format!("unknown protocol {other:?}")),
        }
    }
}

/// All correlation variants computed by [`vendramin_score`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VendraminDetail {
    pub method: CorrelationMethod,
    pub pearson: f64,
    pub spearman: f64,
    /// Correlations after negating min-optimal index values.
    pub oriented_pearson: f64,
    pub oriented_spearman: f64,
    pub partitions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProtocolDetail {
    MilliganCooper {
        best_k: usize,
        n_classes: usize,
        k_delta: i64,
    },
    Gurrutxaga {
        best_index: usize,
        best_similarity: f64,
        max_similarity: f64,
    },
    Vendramin(VendraminDetail),
    NewGoodness {
        best_index: usize,
        best_similarity: f64,
        max_similarity: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolScore {
    pub protocol: Protocol,
    pub value: f64,
    pub detail: ProtocolDetail,
}

/// Index of the best value; ties go to the smallest `k`, then to the
/// earliest entry.
pub fn select_best(values: &[CviValue], direction: Direction) -> Result<usize, EvalError> {
    if values.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(pos) = values.iter().position(|v| !v.value.is_finite()) {
        return Err(EvalError::NonFinite(pos));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let b = &values[best];
        if direction.better(v.value, b.value) || (v.value == b.value && v.k < b.k) {
            best = i;
        }
    }
    Ok(best)
}

pub fn milligan_cooper_score(best_k: usize, n_classes: usize) -> ProtocolScore {
    ProtocolScore {
        protocol: Protocol::MilliganCooper,
        value: if best_k == n_classes { 1.0 } else { 0.0 },
        detail: ProtocolDetail::MilliganCooper {
            best_k,
            n_classes,
            k_delta: best_k as i64 - n_classes as i64,
        },
    }
}

fn best_and_max(best_index: usize, similarity: &[f64]) -> Result<(f64, f64), EvalError> {
    if similarity.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(pos) = similarity.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite(pos));
    }
    let best = *similarity.get(best_index).ok_or(EvalError::IndexOutOfRange {
        index: best_index,
        len: similarity.len(),
    })?;
    let max = similarity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((best, max))
}

/// Success (1) when the chosen partition attains the maximal similarity.
pub fn gurrutxaga_score(best_index: usize, similarity: &[f64]) -> Result<ProtocolScore, EvalError> {
    let (best, max) = best_and_max(best_index, similarity)?;
    Ok(ProtocolScore {
        protocol: Protocol::Gurrutxaga,
        value: if best == max { 1.0 } else { 0.0 },
        detail: ProtocolDetail::Gurrutxaga {
            best_index,
            best_similarity: best,
            max_similarity: max,
        },
    })
}

/// `S(b) / max S`. Undefined when no partition beats chance (`max S <= 0`).
pub fn new_goodness(best_index: usize, similarity: &[f64]) -> Result<ProtocolScore, EvalError> {
    let (best, max) = best_and_max(best_index, similarity)?;
    if max <= 0.0 {
        return Err(EvalError::NonPositiveMaxSimilarity(max));
    }
    Ok(ProtocolScore {
        protocol: Protocol::NewGoodness,
        value: best / max,
        detail: ProtocolDetail::NewGoodness {
            best_index,
            best_similarity: best,
            max_similarity: max,
        },
    })
}

/// Correlation of raw index values with similarity, by `method`. The
/// oriented variants negate min-optimal values first.
pub fn vendramin_score(
    values: &[f64],
    similarity: &[f64],
    method: CorrelationMethod,
    direction: Direction,
) -> Result<ProtocolScore, EvalError> {
    if values.len() != similarity.len() {
        return Err(EvalError::LengthMismatch(values.len(), similarity.len()));
    }
    if values.len() < 3 {
        return Err(EvalError::TooFewPartitions(values.len()));
    }
    let p = pearson(values, similarity)?;
    let s = spearman(values, similarity)?;
    let sign = match direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };
    let detail = VendraminDetail {
        method,
        pearson: p,
        spearman: s,
        oriented_pearson: sign * p,
        oriented_spearman: sign * s,
        partitions: values.len(),
    };
    Ok(ProtocolScore {
        protocol: Protocol::Vendramin,
        value: match method {
            CorrelationMethod::Pearson => p,
            CorrelationMethod::Spearman => s,
        },
        detail: ProtocolDetail::Vendramin(detail),
    })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(EvalError::Empty);
    }
    for (i, (a, b)) in x.iter().zip(y).enumerate() {
        if !a.is_finite() || !b.is_finite() {
            return Err(EvalError::NonFinite(i));
        }
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(EvalError::Constant("index"));
    }
    if syy == 0.0 {
        return Err(EvalError::Constant("similarity"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation; ties receive their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// 1-based ranks with ties averaged.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Mean and median of goodness values gathered over several datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodnessSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

pub fn summarize_goodness(values: &[f64]) -> Result<GoodnessSummary, EvalError> {
    if values.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite(pos));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    Ok(GoodnessSummary {
        count: values.len(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        median,
    })
}

/// What to compute in [`evaluate_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub dataset_id: String,
    pub cvis: Vec<CviKind>,
    pub protocols: Vec<Protocol>,
    pub correlation: CorrelationMethod,
    pub conventions: Conventions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            dataset_id: String::new(),
            cvis: CviKind::ALL.to_vec(),
            protocols: Protocol::ALL.to_vec(),
            correlation: CorrelationMethod::default(),
            conventions: Conventions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub dataset: String,
    pub n: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub standardized: bool,
    pub algorithms: Vec<String>,
    pub k_min: usize,
    pub k_max: usize,
    pub correlation: CorrelationMethod,
    pub conventions: Conventions,
}

/// One index evaluated on one partition. Exactly one field is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub value: Option<f64>,
    pub degenerate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRow {
    pub index: usize,
    pub k: usize,
    pub algorithm: String,
    pub ari: Option<f64>,
    pub ari_error: Option<String>,
    /// Aligned with [`EvaluationReport::cvis`].
    pub values: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestPartition {
    /// Row index in [`EvaluationReport::rows`].
    pub index: usize,
    pub k: usize,
    pub value: f64,
    pub ari: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolFailure {
    pub protocol: Protocol,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CviSummary {
    pub cvi: CviKind,
    pub direction: Direction,
    pub best: Option<BestPartition>,
    /// Row indices whose value was degenerate and took no part in selection.
    pub skipped: Vec<usize>,
    pub scores: Vec<ProtocolScore>,
    pub failures: Vec<ProtocolFailure>,
}

impl CviSummary {
    pub fn score(&self, protocol: Protocol) -> Option<&ProtocolScore> {
        self.scores.iter().find(|s| s.protocol == protocol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub provenance: Provenance,
    pub cvis: Vec<CviKind>,
    pub protocols: Vec<Protocol>,
    pub rows: Vec<PartitionRow>,
    pub summaries: Vec<CviSummary>,
}

impl EvaluationReport {
    pub fn summary(&self, cvi: CviKind) -> Option<&CviSummary> {
        self.summaries.iter().find(|s| s.cvi == cvi)
    }

    /// Value of `cvi` per row; `None` where degenerate or not computed.
    pub fn values(&self, cvi: CviKind) -> Vec<Option<f64>> {
        match self.cvis.iter().position(|&c| c == cvi) {
            Some(col) => self.rows.iter().map(|r| r.values[col].value).collect(),
            None => vec![None; self.rows.len()],
        }
    }

    pub fn ari(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.ari).collect()
    }

    /// True when some requested protocol could not be computed.
    pub fn has_failures(&self) -> bool {
        self.summaries.iter().any(|s| !s.failures.is_empty())
    }
}

/// Runs every requested index and protocol over a partition set.
///
/// The dataset's features must be the matrix the partitions were built
/// from. Degenerate cells are recorded, excluded from their index's
/// selection, and do not abort the run.
pub fn evaluate_suite(
    dataset: &LabeledDataset,
    partitions: &PartitionSet,
    options: &SuiteOptions,
) -> Result<EvaluationReport, EvalError> {
    let n = partitions.n().ok_or(EvalError::NoPartitions)?;
    if n != dataset.n() {
        return Err(EvalError::SizeMismatch {
            expected: dataset.n(),
            found: n,
        });
    }
    let distances = euclidean_distances(&dataset.features);
    let input = CviInput {
        matrix: &dataset.features,
        distances: &distances,
    };

    let rows: Vec<PartitionRow> = partitions
        .entries()
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let (ari, ari_error) = match adjusted_rand(&dataset.labels, &entry.partition) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let values = options
                .cvis
                .iter()
                .map(|&cvi| match compute(cvi, input, &entry.partition, options.conventions) {
                    Ok(v) => Cell { value: Some(v), degenerate: None },
                    Err(e) => Cell { value: None, degenerate: Some(e.to_string()) },
                })
                .collect();
            PartitionRow {
                index,
                k: entry.k,
                algorithm: entry.algorithm.clone(),
                ari,
                ari_error,
                values,
            }
        })
        .collect();

    let summaries = options
        .cvis
        .iter()
        .enumerate()
        .map(|(col, &cvi)| summarize_cvi(cvi, col, &rows, dataset.n_classes(), options))
        .collect();

    let mut algorithms: Vec<String> = Vec::new();
    for e in partitions.iter() {
        if !algorithms.contains(&e.algorithm) {
            algorithms.push(e.algorithm.clone());
        }
    }
    Ok(EvaluationReport {
        provenance: Provenance {
            dataset: options.dataset_id.clone(),
            n: dataset.n(),
            n_features: dataset.features.ncols(),
            n_classes: dataset.n_classes(),
            standardized: dataset.features.is_standardized(),
            algorithms,
            k_min: rows.iter().map(|r| r.k).min().expect("non-empty"),
            k_max: rows.iter().map(|r| r.k).max().expect("non-empty"),
            correlation: options.correlation,
            conventions: options.conventions,
        },
        cvis: options.cvis.clone(),
        protocols: options.protocols.clone(),
        rows,
        summaries,
    })
}

fn summarize_cvi(
    cvi: CviKind,
    col: usize,
    rows: &[PartitionRow],
    n_classes: usize,
    options: &SuiteOptions,
) -> CviSummary {
    let direction = cvi.direction();
    let mut candidates = Vec::new();
    let mut skipped = Vec::new();
    for r in rows {
        match r.values[col].value {
            Some(value) => candidates.push((r.index, CviValue { cvi, k: r.k, value })),
            None => skipped.push(r.index),
        }
    }
    let values: Vec<CviValue> = candidates.iter().map(|c| c.1).collect();
    let best = select_best(&values, direction).ok().map(|i| {
        let (index, v) = candidates[i];
        BestPartition {
            index,
            k: v.k,
            value: v.value,
            ari: rows[index].ari,
        }
    });

    // similarity over rows with a defined ARI
    let sim_rows: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.ari.map(|a| (r.index, a))).collect();
    let similarity: Vec<f64> = sim_rows.iter().map(|s| s.1).collect();
    let best_sim_pos = best
        .as_ref()
        .and_then(|b| sim_rows.iter().position(|s| s.0 == b.index));

    let mut scores = Vec::new();
    let mut failures = Vec::new();
    let mut fail = |protocol, reason: String| failures.push(ProtocolFailure { protocol, reason });
    for &protocol in &options.protocols {
        let result = match protocol {
            Protocol::MilliganCooper => best
                .as_ref()
                .map(|b| milligan_cooper_score(b.k, n_classes))
                .ok_or_else(|| "no partition has a valid index value".to_string()),
            Protocol::Gurrutxaga | Protocol::NewGoodness => match (&best, best_sim_pos) {
                (None, _) => Err("no partition has a valid index value".to_string()),
                (Some(_), None) => Err("similarity undefined at the best partition".to_string()),
                (Some(_), Some(pos)) => {
                    let r = if protocol == Protocol::Gurrutxaga {
                        gurrutxaga_score(pos, &similarity)
                    } else {
                        new_goodness(pos, &similarity)
                    };
                    r.map(|mut s| {
                        remap_index(&mut s, &sim_rows);
                        s
                    })
                    .map_err(|e| e.to_string())
                }
            },
            Protocol::Vendramin => {
                let (v, s): (Vec<f64>, Vec<f64>) = rows
                    .iter()
                    .filter_map(|r| Some((r.values[col].value?, r.ari?)))
                    .unzip();
                vendramin_score(&v, &s, options.correlation, direction).map_err(|e| e.to_string())
            }
        };
        match result {
            Ok(score) => scores.push(score),
            Err(reason) => fail(protocol, reason),
        }
    }
    CviSummary {
        cvi,
        direction,
        best,
        skipped,
        scores,
        failures,
    }
}

// Protocol details index into the similarity vector; report row indices instead.
fn remap_index(score: &mut ProtocolScore, sim_rows: &[(usize, f64)]) {
    match &mut score.detail {
        ProtocolDetail::Gurrutxaga { best_index, .. } | ProtocolDetail::NewGoodness { best_index, .. } => {
            *best_index = sim_rows[*best_index].0;
        }
        _ => {}
    }
}
