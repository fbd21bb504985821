use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseDirectedGraph;
use crate::randsvd::{iterative_partial_svd, projection_svd, sampling_svd, ProjectionConfig, SamplingConfig, SvdFactor};
use crate::rng::derive_seed;

use super::{lloyd_kmeans, spherical_kmedian, ClusterAssignment, ClusterConfig};

/// SVD backend for the co-clustering pipeline. The `rank` field of a backend
/// config is ignored: the pipeline always asks for `ky` components.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Exact { tol: f64, max_iter: usize },
    Projection(ProjectionConfig),
    Sampling(SamplingConfig),
}

impl Backend {
    pub fn exact() -> Self {
        Backend::Exact {
            tol: SamplingConfig::DEFAULT_TOL,
            max_iter: SamplingConfig::DEFAULT_MAX_ITER,
        }
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Exact { .. } => BackendKind::Exact,
            Backend::Projection(_) => BackendKind::Projection,
            Backend::Sampling(_) => BackendKind::Sampling,
        }
    }

    pub fn svd(&self, g: &SparseDirectedGraph, rank: usize) -> Result<SvdFactor> {
        match self {
            Backend::Exact { tol, max_iter } => iterative_partial_svd(g, rank, *tol, *max_iter),
            Backend::Projection(cfg) => projection_svd(g, &ProjectionConfig { rank, ..*cfg }),
            Backend::Sampling(cfg) => sampling_svd(g, &SamplingConfig { rank, ..*cfg }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Exact,
    Projection,
    Sampling,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Exact => "exact",
            BackendKind::Projection => "projection",
            BackendKind::Sampling => "sampling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "kmeans")]
    KMeans,
    #[serde(rename = "kmedian")]
    SphericalKMedian,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::KMeans => "kmeans",
            Method::SphericalKMedian => "kmedian",
        }
    }

    pub fn run(self, x: &crate::dense::DenseMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
        let cfg = ClusterConfig::default();
        match self {
            Method::KMeans => lloyd_kmeans(x, k, seed, &cfg),
            Method::SphericalKMedian => spherical_kmedian(x, k, seed, &cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub singular_values: Vec<f64>,
    pub svd_converged: bool,
    pub svd_iterations: usize,
    pub row_objective: f64,
    pub col_objective: f64,
    pub row_zero_rows: usize,
    pub col_zero_rows: usize,
    pub svd_ms: f64,
    pub cluster_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoClusterResult {
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub svd: SvdFactor,
    pub backend: BackendKind,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// Rank-`ky` SVD followed by clustering the rows of U into `ky` groups and
/// the rows of V into `kz` groups.
///
/// Row and column clustering use seeds derived from `seed`, independent of
/// the backend, so backends can be compared under identical clustering noise.
pub fn co_cluster(
    g: &SparseDirectedGraph,
    ky: usize,
    kz: usize,
    backend: &Backend,
    method: Method,
    seed: u64,
) -> Result<CoClusterResult> {
    let n = g.n();
    if ky == 0 || ky > kz || kz > n {
        return Err(Error::validation(
            "clusters",
            format!("need 1 <= ky <= kz <= n, got ky = {ky}, kz = {kz}, n = {n}"),
        ));
    }
    let t0 = Instant::now();
    let svd = backend.svd(g, ky)?;
    let svd_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let (rows, cols) = rayon::join(
        || method.run(&svd.u, ky, derive_seed(&[seed, 1])),
        || method.run(&svd.v, kz, derive_seed(&[seed, 2])),
    );
    let (rows, cols) = (rows?, cols?);
    let cluster_ms = t1.elapsed().as_secs_f64() * 1e3;

    Ok(CoClusterResult {
        diagnostics: Diagnostics {
            singular_values: svd.sigma.clone(),
            svd_converged: svd.converged,
            svd_iterations: svd.iterations,
            row_objective: rows.objective,
            col_objective: cols.objective,
            row_zero_rows: rows.zero_rows,
            col_zero_rows: cols.zero_rows,
            svd_ms,
            cluster_ms,
        },
        row_labels: rows.labels,
        col_labels: cols.labels,
        svd,
        backend: backend.kind(),
        method,
    })
}
