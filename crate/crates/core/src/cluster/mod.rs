//! Clustering of singular-vector embeddings and the co-clustering pipeline.

mod kmeans;
mod kmedian;
mod pipeline;

pub use kmeans::lloyd_kmeans;
pub use kmedian::{spherical_kmedian, ZERO_ROW_TOL};
pub use pipeline::{co_cluster, Backend, BackendKind, CoClusterResult, Diagnostics, Method};

use rand::Rng;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Iteration limits shared by both clustering algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterConfig {
    pub max_iter: usize,
    pub restarts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            restarts: 10,
        }
    }
}

/// Labels, centers, and objective of one clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// k x d centers.
    pub centers: DenseMatrix,
    /// Sum of squared distances (k-means) or of distances (k-median).
    pub objective: f64,
    pub converged: bool,
    /// Rows set aside as numerically zero (k-median only).
    pub zero_rows: usize,
}

pub(crate) fn check_input(x: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::validation("k", "must be at least 1"));
    }
    if x.rows() < k {
        return Err(Error::validation(
            "k",
            format!("{} rows cannot form {k} clusters", x.rows()),
        ));
    }
    if !x.is_finite() {
        return Err(Error::validation("embedding", "entries must be finite"));
    }
    Ok(())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center (lowest index on ties) and its squared distance.
pub(crate) fn nearest(point: &[f64], centers: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = squared_distance(point, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// D^power seeding: the first center is uniform, later ones are drawn with
/// probability proportional to `dist^power` to the nearest chosen center.
pub(crate) fn seed_centers<R: Rng>(x: &DenseMatrix, k: usize, power: f64, rng: &mut R) -> DenseMatrix {
    let (m, d) = x.shape();
    let mut centers = DenseMatrix::zeros(k, d);
    let first = rng.gen_range(0..m);
    centers.row_mut(0).copy_from_slice(x.row(first));
    let mut weight: Vec<f64> = (0..m)
        .map(|i| squared_distance(x.row(i), x.row(first)).powf(power / 2.0))
        .collect();
    for c in 1..k {
        let total: f64 = weight.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in weight.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against rounding past the last positive weight
            if weight[chosen] == 0.0 {
                chosen = weight.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.gen_range(0..m)
        };
        centers.row_mut(c).copy_from_slice(x.row(pick));
        for (i, w) in weight.iter_mut().enumerate() {
            let dnew = squared_distance(x.row(i), x.row(pick)).powf(power / 2.0);
            if dnew < *w {
                *w = dnew;
            }
        }
    }
    centers
}
