//! Internal cluster validity indices.
//!
//! Calinski-Harabasz and Davies-Bouldin work on coordinates; mean silhouette
//! width and point-biserial correlation work on pairwise distances. Inputs
//! that would make an index infinite or undefined yield a [`CviError`].

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::data::{DataMatrix, DistanceMatrix};
use crate::partition::Partition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CviError {
    #[error("{cvi}: k = {k} is outside {min}..={max}")]
    KOutOfRange {
        cvi: CviKind,
        k: usize,
        min: usize,
        max: usize,
    },
    #[error("partition covers {found} objects but the data has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("within-cluster sum of squares is zero (perfect separation)")]
    ZeroWithinDispersion,
    #[error("centroids of clusters {0} and {1} coincide")]
    CoincidentCentroids(usize, usize),
    #[error("pair indicator is constant (all pairs within or all between clusters)")]
    ConstantIndicator,
    #[error("all pairwise distances are equal")]
    ZeroDistanceVariance,
}

/// Whether large or small index values indicate a good partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CviKind {
    CalinskiHarabasz,
    DaviesBouldin,
    MeanSilhouette,
    PointBiserial,
}

impl CviKind {
    /// Reporting order: CH, point-biserial, silhouette, DB.
    pub const ALL: [CviKind; 4] = [
        CviKind::CalinskiHarabasz,
        CviKind::PointBiserial,
        CviKind::MeanSilhouette,
        CviKind::DaviesBouldin,
    ];

    pub fn direction(self) -> Direction {
        match self {
            CviKind::DaviesBouldin => Direction::Minimize,
            _ => Direction::Maximize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CviKind::CalinskiHarabasz => "calinski_harabasz",
            CviKind::DaviesBouldin => "davies_bouldin",
            CviKind::MeanSilhouette => "mean_silhouette",
            CviKind::PointBiserial => "point_biserial",
        }
    }
}

impl fmt::Display for CviKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CviKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "calinski_harabasz" | "ch" => Ok(CviKind::CalinskiHarabasz),
            "davies_bouldin" | "db" => Ok(CviKind::DaviesBouldin),
            "mean_silhouette" | "silhouette" | "asw" => Ok(CviKind::MeanSilhouette),
            "point_biserial" | "pb" => Ok(CviKind::PointBiserial),
            other => Err(format!("unknown CVI {other:?}")),
        }
    }
}

/// An index value for a partition with `k` clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CviValue {
    pub cvi: CviKind,
    pub k: usize,
    pub value: f64,
}

/// Silhouette assigned to members of singleton clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingletonScore {
    /// Rousseeuw's convention, as in R `cluster::silhouette`.
    Zero,
    /// R `NbClust` convention.
    #[default]
    One,
}

/// Within-cluster dispersion used by Davies-Bouldin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// Mean distance of members to the centroid.
    Mean,
    /// Root mean squared distance to the centroid (R `NbClust`, q = 2).
    #[default]
    Rms,
}

/// Variant choices for indices whose definition differs between toolchains.
///
/// The defaults reproduce the values R's `NbClust` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Conventions {
    pub silhouette_singleton: SingletonScore,
    pub db_dispersion: Dispersion,
}

/// Data an index can be computed from. Coordinates must be the clustering
/// input; distances must be the Euclidean distances of those coordinates.
#[derive(Debug, Clone, Copy)]
pub struct CviInput<'a> {
    pub matrix: &'a DataMatrix,
    pub distances: &'a DistanceMatrix,
}

pub fn compute(
    cvi: CviKind,
    input: CviInput<'_>,
    p: &Partition,
    conv: Conventions,
) -> Result<f64, CviError> {
    match cvi {
        CviKind::CalinskiHarabasz => calinski_harabasz(input.matrix, p),
        CviKind::DaviesBouldin => davies_bouldin_with(input.matrix, p, conv.db_dispersion),
        CviKind::MeanSilhouette => {
            mean_silhouette_with(input.distances, p, conv.silhouette_singleton)
        }
        CviKind::PointBiserial => point_biserial(input.distances, p),
    }
}

/// Validates sizes and returns the partition with clusters numbered by first
/// member, so accumulation order does not depend on label names.
fn check(cvi: CviKind, n: usize, p: &Partition, min: usize, max: usize) -> Result<Partition, CviError> {
    if p.n() != n {
        return Err(CviError::SizeMismatch {
            expected: n,
            found: p.n(),
        });
    }
    if p.k() < min || p.k() > max {
        return Err(CviError::KOutOfRange {
            cvi,
            k: p.k(),
            min,
            max,
        });
    }
    Ok(p.canonical())
}

fn centroids(m: &DataMatrix, p: &Partition) -> Vec<Vec<f64>> {
    let dim = m.ncols();
    let mut sums = vec![vec![0.0; dim]; p.k()];
    for (i, row) in m.rows().enumerate() {
        for (s, v) in sums[p.cluster_of(i)].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (c, size) in p.sizes().into_iter().enumerate() {
        for s in &mut sums[c] {
            *s /= size as f64;
        }
    }
    sums
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Variance ratio `[BGSS/(k-1)] / [WGSS/(n-k)]`. Max-optimal.
pub fn calinski_harabasz(m: &DataMatrix, p: &Partition) -> Result<f64, CviError> {
    let n = m.nrows();
    let p = &check(CviKind::CalinskiHarabasz, n, p, 2, n.saturating_sub(1))?;
    let k = p.k();
    let cents = centroids(m, p);
    let dim = m.ncols();
    let mut grand = vec![0.0; dim];
    for row in m.rows() {
        for (g, v) in grand.iter_mut().zip(row) {
            *g += v;
        }
    }
    grand.iter_mut().for_each(|g| *g /= n as f64);

    let bgss: f64 = p
        .sizes()
        .iter()
        .zip(&cents)
        .map(|(&size, c)| size as f64 * sq_dist(c, &grand))
        .sum();
    let wgss: f64 = m
        .rows()
        .enumerate()
        .map(|(i, row)| sq_dist(row, &cents[p.cluster_of(i)]))
        .sum();
    if wgss == 0.0 {
        return Err(CviError::ZeroWithinDispersion);
    }
    Ok((bgss / (k - 1) as f64) / (wgss / (n - k) as f64))
}

/// Davies-Bouldin with RMS dispersion. Min-optimal.
pub fn davies_bouldin(m: &DataMatrix, p: &Partition) -> Result<f64, CviError> {
    davies_bouldin_with(m, p, Dispersion::default())
}

/// `DB = (1/k) sum_i max_{j != i} (S_i + S_j) / |c_i - c_j|`.
pub fn davies_bouldin_with(
    m: &DataMatrix,
    p: &Partition,
    dispersion: Dispersion,
) -> Result<f64, CviError> {
    let n = m.nrows();
    let p = &check(CviKind::DaviesBouldin, n, p, 2, n)?;
    let k = p.k();
    let cents = centroids(m, p);
    let sizes = p.sizes();
    let mut spread = vec![0.0; k];
    for (i, row) in m.rows().enumerate() {
        let c = p.cluster_of(i);
        let sq = sq_dist(row, &cents[c]);
        spread[c] += match dispersion {
            Dispersion::Mean => sq.sqrt(),
            Dispersion::Rms => sq,
        };
    }
    for (s, &size) in spread.iter_mut().zip(&sizes) {
        *s /= size as f64;
        if dispersion == Dispersion::Rms {
            *s = s.sqrt();
        }
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for j in (0..k).filter(|&j| j != i) {
            let sep = sq_dist(&cents[i], &cents[j]).sqrt();
            if sep == 0.0 {
                return Err(CviError::CoincidentCentroids(i.min(j) + 1, i.max(j) + 1));
            }
            worst = worst.max((spread[i] + spread[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Mean silhouette width with the default singleton convention.
pub fn mean_silhouette(d: &DistanceMatrix, p: &Partition) -> Result<f64, CviError> {
    mean_silhouette_with(d, p, SingletonScore::default())
}

/// Per-object silhouette widths `(b - a) / max(a, b)`.
pub fn silhouette_widths(
    d: &DistanceMatrix,
    p: &Partition,
    singleton: SingletonScore,
) -> Result<Vec<f64>, CviError> {
    let n = d.n();
    let p = &check(CviKind::MeanSilhouette, n, p, 2, n.saturating_sub(1))?;
    let k = p.k();
    let sizes = p.sizes();
    let mut sums = vec![0.0; k];
    let mut widths = Vec::with_capacity(n);
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in (0..n).filter(|&j| j != i) {
            sums[p.cluster_of(j)] += d.get(i, j);
        }
        let own = p.cluster_of(i);
        if sizes[own] == 1 {
            widths.push(match singleton {
                SingletonScore::Zero => 0.0,
                SingletonScore::One => 1.0,
            });
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        widths.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
    }
    Ok(widths)
}

pub fn mean_silhouette_with(
    d: &DistanceMatrix,
    p: &Partition,
    singleton: SingletonScore,
) -> Result<f64, CviError> {
    let w = silhouette_widths(d, p, singleton)?;
    Ok(w.iter().sum::<f64>() / w.len() as f64)
}

/// Pearson correlation between pairwise distances and the indicator
/// "pair lies in different clusters". Max-optimal.
pub fn point_biserial(d: &DistanceMatrix, p: &Partition) -> Result<f64, CviError> {
    let n = d.n();
    let p = &check(CviKind::PointBiserial, n, p, 2, n.saturating_sub(1))?;
    let m = d.condensed().len() as f64;
    let (mut sum_d, mut sum_b, mut n_b) = (0.0, 0.0, 0usize);
    for (i, j, v) in d.pairs() {
        sum_d += v;
        if p.label(i) != p.label(j) {
            sum_b += v;
            n_b += 1;
        }
    }
    let n_w = d.condensed().len() - n_b;
    if n_b == 0 || n_w == 0 {
        return Err(CviError::ConstantIndicator);
    }
    let mean_d = sum_d / m;
    let var_d = d.condensed().iter().map(|v| (v - mean_d).powi(2)).sum::<f64>();
    if var_d == 0.0 {
        return Err(CviError::ZeroDistanceVariance);
    }
    // covariance with the 0/1 indicator reduces to sum over between pairs
    let frac_b = n_b as f64 / m;
    let cov = sum_b - frac_b * sum_d;
    let var_t = n_b as f64 * (1.0 - frac_b);
    Ok(cov / (var_d * var_t).sqrt())
}
