use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SparseDirectedGraph;
use crate::rng;

use super::{iterative_partial_svd, SvdFactor};

/// Parameters of the random-sampling SVD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub rank: usize,
    /// Probability of keeping each edge, in (0, 1].
    pub p: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SamplingConfig {
    pub const DEFAULT_TOL: f64 = 1e-8;
    pub const DEFAULT_MAX_ITER: usize = 1000;

    pub fn new(rank: usize, p: f64, seed: u64) -> Self {
        Self {
            rank,
            p,
            seed,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }
}

/// Keep each stored edge independently with probability `p` and scale kept
/// values by `1/p`. Row `i` draws one uniform per stored entry, in column
/// order, from stream `i` of `seed`.
pub fn sparsify(g: &SparseDirectedGraph, p: f64, seed: u64) -> Result<SparseDirectedGraph> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::validation("p", format!("sampling probability {p} not in (0, 1]")));
    }
    if p == 1.0 {
        return Ok(g.clone());
    }
    let n = g.n();
    let kept: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            for (&j, &v) in g.row_indices(i).iter().zip(g.row_values(i)) {
                if rng.gen::<f64>() < p {
                    cols.push(j);
                    vals.push(v / p);
                }
            }
            (cols, vals)
        })
        .collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    for (cols, vals) in kept {
        col_indices.extend(cols);
        values.extend(vals);
        row_offsets.push(col_indices.len());
    }
    Ok(SparseDirectedGraph::from_parts_unchecked(n, row_offsets, col_indices, values))
}

/// Partial SVD of the sparsified graph.
pub fn sampling_svd(g: &SparseDirectedGraph, cfg: &SamplingConfig) -> Result<SvdFactor> {
    let sparse = sparsify(g, cfg.p, cfg.seed)?;
    iterative_partial_svd(&sparse, cfg.rank, cfg.tol, cfg.max_iter)
}
