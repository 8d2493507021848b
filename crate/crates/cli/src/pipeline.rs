//! The `evaluate`, `plot` and `synth` commands.

use std::path::{Path, PathBuf};

use cvieval::data::{generate_blobs, load_csv, Blob, LabelColumn, LabeledDataset};
use cvieval::evaluate::{
    evaluate_suite, vendramin_score, CorrelationMethod, EvaluationReport, Protocol, SuiteOptions,
};
use cvieval::hierclust::{cut_range, upgma, Dendrogram, PartitionSet};
use cvieval::internal_cvi::{Conventions, CviKind, Dispersion, SingletonScore};
use cvieval::partition::load_partition_csv;
use cvieval::euclidean_distances;
use sha2::{Digest, Sha256};

use crate::args::{DatasetArgs, DispersionArg, EvaluateArgs, PlotArgs, PlotKind, SingletonArg, SynthArgs};
use crate::output::{self, fmt_f64, write_atomic};
use crate::svg::{render_panels, Chart, Series};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

/// Validated settings shared by all dataset commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub label: LabelColumn,
    pub has_header: bool,
    pub standardize: bool,
    pub expect_checksum: Option<String>,
    pub k_min: usize,
    pub k_max: usize,
    pub cvis: Vec<CviKind>,
    pub protocols: Vec<Protocol>,
    pub correlation: CorrelationMethod,
    pub conventions: Conventions,
    pub output_dir: PathBuf,
    pub formats: Formats,
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_protocols(s: &str) -> Result<Vec<Protocol>, CliError> {
    match s.trim() {
        "all" => Ok(Protocol::ALL.to_vec()),
        "none" => Ok(Vec::new()),
        list => {
            let mut out = Vec::new();
            for p in split_list(list) {
                let p: Protocol = p.parse().map_err(CliError::Config)?;
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

impl RunConfig {
    pub fn from_args(a: &DatasetArgs, protocols: &str) -> Result<Self, CliError> {
        let mut cvis = Vec::new();
        for c in split_list(&a.cvis) {
            let c: CviKind = c.parse().map_err(CliError::Config)?;
            if !cvis.contains(&c) {
                cvis.push(c);
            }
        }
        if cvis.is_empty() {
            return Err(CliError::Config("CVI list is empty".into()));
        }
        let mut formats = Formats::default();
        for f in split_list(&a.formats) {
            match f {
                "csv" => formats.csv = true,
                "json" => formats.json = true,
                "svg" => formats.svg = true,
                other => return Err(CliError::Config(format!("unknown output format {other:?}"))),
            }
        }
        if a.kmin < 2 || a.kmin > a.kmax {
            return Err(CliError::Config(format!(
                "k range {}..={} is invalid (need 2 <= kmin <= kmax)",
                a.kmin, a.kmax
            )));
        }
        Ok(RunConfig {
            input: a.input.clone(),
            label: a.label_col.clone(),
            has_header: !a.no_header,
            standardize: !a.no_standardize,
            expect_checksum: a.expect_checksum.clone(),
            k_min: a.kmin,
            k_max: a.kmax,
            cvis,
            protocols: parse_protocols(protocols)?,
            correlation: a.correlation.parse().map_err(CliError::Config)?,
            conventions: Conventions {
                silhouette_singleton: match a.silhouette_singleton {
                    SingletonArg::Zero => SingletonScore::Zero,
                    SingletonArg::One => SingletonScore::One,
                },
                db_dispersion: match a.db_dispersion {
                    DispersionArg::Mean => Dispersion::Mean,
                    DispersionArg::Rms => Dispersion::Rms,
                },
            },
            output_dir: a.output_dir.clone(),
            formats,
        })
    }

    fn suite_options(&self, dataset_id: String) -> SuiteOptions {
        SuiteOptions {
            dataset_id,
            cvis: self.cvis.clone(),
            protocols: self.protocols.clone(),
            correlation: self.correlation,
            conventions: self.conventions,
        }
    }
}

pub fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// A loaded (and by default standardized) dataset with its dendrogram.
pub struct Prepared {
    pub id: String,
    pub dataset: LabeledDataset,
    pub dendrogram: Dendrogram,
    pub warnings: Vec<String>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    if let Some(expected) = &cfg.expect_checksum {
        let actual = sha256_hex(&cfg.input)?;
        if !actual.eq_ignore_ascii_case(expected.trim()) {
            return Err(CliError::Data(format!(
                "checksum mismatch for {}: expected {expected}, found {actual}",
                cfg.input.display()
            )));
        }
    }
    let raw = load_csv(&cfg.input, &cfg.label, cfg.has_header)
        .map_err(|e| CliError::Data(format!("{}: {e}", cfg.input.display())))?;
    let mut warnings = Vec::new();
    let dataset = if cfg.standardize {
        let (ds, constant) = raw.standardized();
        for c in constant {
            warnings.push(format!("feature column {} is constant; set to zero", c + 1));
        }
        ds
    } else {
        raw
    };
    if cfg.k_max > dataset.n() {
        return Err(CliError::Config(format!(
            "kmax {} exceeds the number of objects {}",
            cfg.k_max,
            dataset.n()
        )));
    }
    let dendrogram = upgma(&euclidean_distances(&dataset.features));
    let id = cfg
        .input
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Prepared {
        id,
        dataset,
        dendrogram,
        warnings,
    })
}

fn upgma_cuts(p: &Prepared, k_min: usize, k_max: usize) -> Result<PartitionSet, CliError> {
    cut_range(&p.dendrogram, k_min, k_max).map_err(|e| CliError::Config(e.to_string()))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Runs the full pipeline. Returns the report and the files written.
///
/// A report whose requested protocols could not all be computed is still
/// written; the error is returned afterwards.
pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<(EvaluationReport, Vec<PathBuf>), CliError> {
    let cfg = RunConfig::from_args(&a.dataset, &a.protocols)?;
    let prepared = prepare(&cfg)?;
    for w in &prepared.warnings {
        eprintln!("warning: {w}");
    }
    let mut set = upgma_cuts(&prepared, cfg.k_min, cfg.k_max)?;
    for file in &a.partition_files {
        let p = load_partition_csv(file)
            .map_err(|e| CliError::Data(format!("{}: {e}", file.display())))?;
        let name = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        set.push(format!("file:{name}"), p)
            .map_err(|e| CliError::Data(format!("{}: {e}", file.display())))?;
    }
    let report = evaluate_suite(&prepared.dataset, &set, &cfg.suite_options(prepared.id.clone()))
        .map_err(|e| CliError::Data(e.to_string()))?;

    ensure_dir(&cfg.output_dir)?;
    let mut written = Vec::new();
    let dir = &cfg.output_dir;
    if cfg.formats.csv {
        written.push(write_atomic(dir, "partitions.csv", &output::partitions_csv(&report)?)?);
    }
    if !cfg.protocols.is_empty() {
        if cfg.formats.csv {
            written.push(write_atomic(dir, "summary.csv", &output::summary_csv(&report)?)?);
        }
        if cfg.formats.json {
            written.push(write_atomic(dir, "report.json", &output::json_bytes(&report)?)?);
        }
    }
    if a.dendrogram {
        written.push(write_atomic(
            dir,
            "dendrogram.json",
            &output::json_bytes(&prepared.dendrogram)?,
        )?);
    }

    if report.has_failures() {
        let first = report
            .summaries
            .iter()
            .flat_map(|s| s.failures.iter().map(move |f| (s.cvi, f)))
            .next()
            .expect("has failures");
        return Err(CliError::Degenerate(format!(
            "{} could not be scored under {}: {}",
            first.0, first.1.protocol, first.1.reason
        )));
    }
    Ok((report, written))
}

/// Correlation of each index with ARI for every `k_max` in the sweep,
/// `k_min` fixed. Cells are `None` where the correlation is undefined.
pub fn correlation_sweep(
    report: &EvaluationReport,
    sweep: std::ops::RangeInclusive<usize>,
    method: CorrelationMethod,
) -> Vec<(usize, Vec<Option<f64>>)> {
    let ari = report.ari();
    sweep
        .map(|k_max| {
            let row = report
                .cvis
                .iter()
                .map(|&cvi| {
                    let (v, s): (Vec<f64>, Vec<f64>) = report
                        .values(cvi)
                        .into_iter()
                        .zip(&ari)
                        .zip(&report.rows)
                        .filter(|(_, r)| r.k <= k_max)
                        .filter_map(|((v, s), _)| Some((v?, (*s)?)))
                        .unzip();
                    vendramin_score(&v, &s, method, cvi.direction()).ok().map(|x| x.value)
                })
                .collect();
            (k_max, row)
        })
        .collect()
}

pub fn cmd_plot(a: &PlotArgs) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig::from_args(&a.dataset, "none")?;
    if a.kind == PlotKind::CorrelationVsKmax && (a.sweep_min > a.sweep_max || a.sweep_min < cfg.k_min) {
        return Err(CliError::Config(format!(
            "sweep {}..={} is invalid (need kmin <= sweep-min <= sweep-max)",
            a.sweep_min, a.sweep_max
        )));
    }
    let prepared = prepare(&cfg)?;
    for w in &prepared.warnings {
        eprintln!("warning: {w}");
    }
    let k_max = match a.kind {
        PlotKind::CorrelationVsKmax => a.sweep_max,
        _ => cfg.k_max,
    };
    if k_max > prepared.dataset.n() {
        return Err(CliError::Config(format!(
            "kmax {k_max} exceeds the number of objects {}",
            prepared.dataset.n()
        )));
    }
    let set = upgma_cuts(&prepared, cfg.k_min, k_max)?;
    let report = evaluate_suite(&prepared.dataset, &set, &cfg.suite_options(prepared.id.clone()))
        .map_err(|e| CliError::Data(e.to_string()))?;
    ensure_dir(&cfg.output_dir)?;
    let dir = &cfg.output_dir;
    let mut written = Vec::new();

    let (name, header, rows, svg): (&str, Vec<String>, Vec<Vec<String>>, String) = match a.kind {
        PlotKind::AriVsK => {
            let points: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter_map(|r| Some((r.k as f64, r.ari?)))
                .collect();
            let best = points
                .iter()
                .copied()
                .reduce(|b, p| if p.1 > b.1 { p } else { b });
            let chart = Chart {
                title: format!("Adjusted Rand index vs number of clusters ({})", prepared.id),
                x_label: "number of clusters".into(),
                y_label: "adjusted Rand index".into(),
                series: vec![Series { name: "ari".into(), points }],
                marks: best.into_iter().collect(),
            };
            let rows = report
                .rows
                .iter()
                .map(|r| vec![r.k.to_string(), r.ari.map(fmt_f64).unwrap_or_default()])
                .collect();
            ("ari_vs_k", vec!["k".to_string(), "ari".to_string()], rows, chart.render())
        }
        PlotKind::CviVsK => {
            let charts: Vec<Chart> = report
                .cvis
                .iter()
                .map(|&cvi| {
                    let points: Vec<(f64, f64)> = report
                        .rows
                        .iter()
                        .zip(report.values(cvi))
                        .filter_map(|(r, v)| Some((r.k as f64, v?)))
                        .collect();
                    let best = report
                        .summary(cvi)
                        .and_then(|s| s.best.as_ref())
                        .map(|b| (b.k as f64, b.value));
                    Chart {
                        title: cvi.name().into(),
                        x_label: "number of clusters".into(),
                        y_label: cvi.name().into(),
                        series: vec![Series { name: cvi.name().into(), points }],
                        marks: best.into_iter().collect(),
                    }
                })
                .collect();
            let mut header = vec!["k".to_string()];
            header.extend(report.cvis.iter().map(|c| c.name().to_string()));
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.k.to_string()];
                    row.extend(r.values.iter().map(|c| c.value.map(fmt_f64).unwrap_or_default()));
                    row
                })
                .collect();
            ("cvi_vs_k", header, rows, render_panels(&charts, 2))
        }
        PlotKind::CorrelationVsKmax => {
            let sweep = correlation_sweep(&report, a.sweep_min..=a.sweep_max, cfg.correlation);
            let series = report
                .cvis
                .iter()
                .enumerate()
                .map(|(i, &cvi)| Series {
                    name: cvi.name().into(),
                    points: sweep
                        .iter()
                        .filter_map(|(k, row)| Some((*k as f64, row[i]?)))
                        .collect(),
                })
                .collect();
            let chart = Chart {
                title: format!("{} correlation with ARI, k from {}", cfg.correlation, cfg.k_min),
                x_label: "maximum number of clusters".into(),
                y_label: "correlation".into(),
                series,
                marks: Vec::new(),
            };
            let mut header = vec!["k_max".to_string()];
            header.extend(report.cvis.iter().map(|c| c.name().to_string()));
            let rows = sweep
                .iter()
                .map(|(k, row)| {
                    let mut out = vec![k.to_string()];
                    out.extend(row.iter().map(|v| v.map(fmt_f64).unwrap_or_default()));
                    out
                })
                .collect();
            ("correlation_vs_kmax", header, rows, chart.render())
        }
    };
    if cfg.formats.csv {
        written.push(write_atomic(dir, &format!("{name}.csv"), &output::csv_bytes(&header, &rows)?)?);
    }
    if cfg.formats.svg {
        written.push(write_atomic(dir, &format!("{name}.svg"), svg.as_bytes())?);
    }
    Ok(written)
}

/// Parses `x1,x2,...:sd:count`.
pub fn parse_blob(s: &str) -> Result<Blob, CliError> {
    let bad = || CliError::Config(format!("blob {s:?} is not of the form x1,x2,...:sd:count"));
    let mut parts = s.split(':');
    let (Some(center), Some(sd), Some(count), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(bad());
    };
    let center = center
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    Ok(Blob {
        center,
        sd: sd.trim().parse().map_err(|_| bad())?,
        count: count.trim().parse().map_err(|_| bad())?,
    })
}

pub fn cmd_synth(a: &SynthArgs) -> Result<PathBuf, CliError> {
    let blobs = a.blobs.iter().map(|b| parse_blob(b)).collect::<Result<Vec<_>, _>>()?;
    let ds = generate_blobs(&blobs, a.seed).map_err(|e| CliError::Config(e.to_string()))?;
    let mut header = vec!["label".to_string()];
    header.extend((1..=ds.features.ncols()).map(|j| format!("x{j}")));
    let rows: Vec<Vec<String>> = ds
        .features
        .rows()
        .zip(ds.labels.labels())
        .map(|(r, l)| {
            let mut row = vec![l.to_string()];
            row.extend(r.iter().map(|&v| fmt_f64(v)));
            row
        })
        .collect();
    let dir = match a.output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    ensure_dir(&dir)?;
    let name = a
        .output
        .file_name()
        .ok_or_else(|| CliError::Config("output path has no file name".into()))?
        .to_string_lossy()
        .into_owned();
    write_atomic(&dir, &name, &output::csv_bytes(&header, &rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_lists() {
        assert_eq!(parse_protocols("all").unwrap().len(), 4);
        assert!(parse_protocols("none").unwrap().is_empty());
        assert_eq!(
            parse_protocols("new_goodness, vendramin,new_goodness").unwrap(),
            vec![Protocol::NewGoodness, Protocol::Vendramin]
        );
        assert!(matches!(parse_protocols("bogus"), Err(CliError::Config(_))));
    }

    #[test]
    fn blob_syntax() {
        let b = parse_blob("0,1.5:0.2:10").unwrap();
        assert_eq!(b, Blob { center: vec![0.0, 1.5], sd: 0.2, count: 10 });
        assert!(parse_blob("0:1").is_err());
        assert!(parse_blob("a:1:2").is_err());
    }
}
