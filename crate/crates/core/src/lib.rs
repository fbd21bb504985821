//! Randomized spectral co-clustering of directed networks.
//!
//! Graphs are stored as CSR matrices ([`SparseDirectedGraph`]). A rank-k SVD
//! comes from one of three backends in [`randsvd`], and [`co_cluster`] groups
//! the rows of the left and right singular vectors into sender and receiver
//! clusters. [`models`] generates stochastic co-block models and computes
//! their population structure; [`metrics`] scores the results.

pub mod cluster;
pub mod dense;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod randsvd;
pub mod rng;
pub mod simulation;

pub use cluster::{
    co_cluster, lloyd_kmeans, spherical_kmedian, Backend, BackendKind, ClusterAssignment, ClusterConfig,
    CoClusterResult, Diagnostics, Method,
};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use graph::{EdgeListFormat, SparseDirectedGraph, DENSE_GUARD};
pub use metrics::{approximation_error, misclustering_rate, spectral_norm, theoretical_bounds, BoundReport};
pub use models::{
    generate_dc_scbm, generate_scbm, population_graph, population_matrix, population_structure, BlockModel,
    DcScbmSpec, MembershipPair, ModelSpec, ModelSpecFile, PopulationStructure, ScbmSpec,
};
pub use randsvd::{
    iterative_partial_svd, projection_svd, sampling_svd, sparsify, ProjectionConfig, SamplingConfig, SvdFactor,
};
