use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvieval::data::LabelColumn;

#[derive(Debug, Parser)]
#[command(name = "cvieval", version, about = "Evaluate internal cluster validity indices against ground truth")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a labeled dataset and score every index under every protocol.
    Evaluate(EvaluateArgs),
    /// Emit the data and SVG chart for a diagnostic plot.
    Plot(PlotArgs),
    /// Write a seeded synthetic labeled dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    /// Input CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Label column, by 0-based index or header name.
    #[arg(long, default_value = "0")]
    pub label_col: LabelColumn,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Use raw features instead of z-scores.
    #[arg(long)]
    pub no_standardize: bool,
    /// Expected SHA-256 of the input file (hex).
    #[arg(long)]
    pub expect_checksum: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub kmin: usize,
    #[arg(long, default_value_t = 15)]
    pub kmax: usize,
    /// Comma-separated indices: ch, pb, asw, db (or full names).
    #[arg(long, default_value = "calinski_harabasz,point_biserial,mean_silhouette,davies_bouldin")]
    pub cvis: String,
    #[arg(long, value_enum, default_value_t = SingletonArg::One)]
    pub silhouette_singleton: SingletonArg,
    #[arg(long, value_enum, default_value_t = DispersionArg::Rms)]
    pub db_dispersion: DispersionArg,
    #[arg(long, default_value = "pearson")]
    pub correlation: String,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long, default_value = "csv,json,svg")]
    pub formats: String,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// Comma-separated protocols, `all`, or `none`.
    #[arg(long, default_value = "all")]
    pub protocols: String,
    /// Extra partitions (`object_id,cluster` CSV) added to the evaluation set.
    #[arg(long = "partitions")]
    pub partition_files: Vec<PathBuf>,
    /// Also write the dendrogram as JSON.
    #[arg(long)]
    pub dendrogram: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    #[value(name = "ari_vs_k", alias = "ari-vs-k")]
    AriVsK,
    #[value(name = "cvi_vs_k", alias = "cvi-vs-k")]
    CviVsK,
    #[value(name = "correlation_vs_kmax", alias = "correlation-vs-kmax")]
    CorrelationVsKmax,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(value_enum)]
    pub kind: PlotKind,
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// First k_max of the correlation sweep.
    #[arg(long, default_value_t = 10)]
    pub sweep_min: usize,
    /// Last k_max of the correlation sweep.
    #[arg(long, default_value_t = 100)]
    pub sweep_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SingletonArg {
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DispersionArg {
    Mean,
    Rms,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Blob as `x1,x2,...:sd:count`; repeat for each blob.
    #[arg(long = "blob", required = true)]
    pub blobs: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; the label is written as the first column.
    #[arg(long)]
    pub output: PathBuf,
}
