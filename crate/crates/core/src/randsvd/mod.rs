//! Rank-k SVD backends for sparse directed graphs.
//!
//! * [`iterative_partial_svd`]: block subspace iteration, the exact baseline.
//! * [`projection_svd`]: Gaussian sketches of the column and row spaces.
//! * [`sampling_svd`]: entrywise sparsification followed by the iterative solver.
//!
//! Every backend returns factors with orthonormal columns and applies the
//! same sign convention: each singular pair is flipped so that the
//! largest-magnitude entry of its left vector is positive.

mod iterative;
mod projection;
mod sampling;

pub use iterative::{iterative_partial_svd, ITERATIVE_BLOCK_EXTRA};
pub use projection::{projection_svd, ProjectionConfig};
pub use sampling::{sampling_svd, sparsify, SamplingConfig};

use crate::dense::DenseMatrix;
use crate::error::Result;
use crate::graph::{SparseDirectedGraph, DENSE_GUARD};

/// Rank-k factors `A ~ U diag(sigma) V^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactor {
    /// n x k left singular vectors.
    pub u: DenseMatrix,
    /// Non-increasing singular values.
    pub sigma: Vec<f64>,
    /// n x k right singular vectors.
    pub v: DenseMatrix,
    /// False when an iterative backend stopped at its iteration cap.
    pub converged: bool,
    /// Solver iterations (power steps for the projection backend).
    pub iterations: usize,
}

impl SvdFactor {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Dense `U diag(sigma) V^T`, refused above the dense guard.
    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        let n = self.u.rows();
        if n > DENSE_GUARD {
            return Err(crate::error::Error::Capacity {
                n,
                limit: DENSE_GUARD,
            });
        }
        let mut us = self.u.clone();
        us.scale_columns(&self.sigma);
        us.matmul(&self.v.transpose())
    }
}

/// A graph together with its transpose, so both products run row-parallel.
pub(crate) struct Operator<'a> {
    a: &'a SparseDirectedGraph,
    at: SparseDirectedGraph,
}

impl<'a> Operator<'a> {
    pub(crate) fn new(a: &'a SparseDirectedGraph) -> Self {
        Self {
            a,
            at: a.transpose(),
        }
    }

    pub(crate) fn nnz(&self) -> usize {
        self.a.nnz()
    }

    /// `A m`
    pub(crate) fn apply(&self, m: &DenseMatrix) -> DenseMatrix {
        self.a.multiply_dense(m, false).expect("operator dimensions")
    }

    /// `A^T m`
    pub(crate) fn apply_t(&self, m: &DenseMatrix) -> DenseMatrix {
        self.at.multiply_dense(m, false).expect("operator dimensions")
    }
}

/// n x k matrix of standard normals; row `i` comes from stream `i` of `seed`.
pub(crate) fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    use rayon::prelude::*;
    let mut m = DenseMatrix::zeros(rows, cols);
    if cols == 0 {
        return m;
    }
    m.as_mut_slice()
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, row)| {
            let mut g = crate::rng::Gaussian::new(crate::rng::stream(seed, i as u64));
            row.iter_mut().for_each(|x| *x = g.sample());
        });
    m
}
