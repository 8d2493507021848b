//! Evaluation of internal cluster validity indices against ground truth.
//!
//! The pipeline: load a labeled dataset, standardize it, cluster it with
//! UPGMA, cut the dendrogram into a range of partitions, compute internal
//! indices and the adjusted Rand index for each partition, then score each
//! index under several evaluation protocols (see [`evaluate`]).

pub mod data;
pub mod evaluate;
pub mod external_cvi;
pub mod hierclust;
pub mod internal_cvi;
pub mod partition;

pub use data::{
    euclidean_distances, generate_blobs, load_csv, read_csv, standardize, Blob, DataError,
    DataMatrix, DistanceMatrix, LabelColumn, LabeledDataset, Standardized,
};
pub use evaluate::{
    evaluate_suite, gurrutxaga_score, milligan_cooper_score, new_goodness, select_best,
    summarize_goodness, vendramin_score, CorrelationMethod, EvalError, EvaluationReport, Protocol,
    ProtocolDetail, ProtocolScore, SuiteOptions,
};
pub use external_cvi::{adjusted_rand, adjusted_rand_detail, AriError, ContingencyTable};
pub use hierclust::{cut_k, cut_range, upgma, ClusterError, Dendrogram, Merge, PartitionSet};
pub use internal_cvi::{
    calinski_harabasz, davies_bouldin, davies_bouldin_with, mean_silhouette, mean_silhouette_with,
    point_biserial, Conventions, CviError, CviKind, CviValue, Direction, Dispersion,
    SingletonScore,
};
pub use partition::{load_partition_csv, read_partition_csv, Partition, PartitionError};
