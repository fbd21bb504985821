use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::SparseDirectedGraph;
use crate::linalg;
use crate::rng::derive_seed;

use super::{gaussian_matrix, Operator, SvdFactor};

/// Parameters of the random-projection SVD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    /// Target rank.
    pub rank: usize,
    /// Extra columns in the row-space test matrix (`Gamma` has `rank + r`).
    pub oversample_r: usize,
    /// Extra columns in the column-space test matrix (`Omega` has `rank + s`).
    pub oversample_s: usize,
    /// Number of power steps `q`.
    pub power_q: usize,
    pub seed: u64,
}

impl ProjectionConfig {
    pub const DEFAULT_OVERSAMPLE: usize = 10;
    pub const DEFAULT_POWER: usize = 2;

    pub fn new(rank: usize, seed: u64) -> Self {
        Self {
            rank,
            oversample_r: Self::DEFAULT_OVERSAMPLE,
            oversample_s: Self::DEFAULT_OVERSAMPLE,
            power_q: Self::DEFAULT_POWER,
            seed,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::validation("rank", "must be at least 1"));
        }
        let widest = self.rank + self.oversample_r.max(self.oversample_s);
        if widest > n {
            return Err(Error::validation(
                "oversample",
                format!("rank + max(r, s) = {widest} exceeds n = {n}"),
            ));
        }
        Ok(())
    }
}

/// Randomized SVD from Gaussian sketches of both sides of `A`.
///
/// `Omega` (n x (rank+s)) and `Gamma` (n x (rank+r)) are drawn from the
/// seed; `Q` spans `(A A^T)^q A Omega` and `T` spans `(A^T A)^q A^T Gamma`,
/// re-orthonormalized after every product. The small matrix `Q^T A T` is
/// decomposed exactly and the leading `rank` triplets are lifted back.
/// A sketch that is non-finite or numerically zero for a nonzero `A` is
/// redrawn once before failing.
pub fn projection_svd(g: &SparseDirectedGraph, cfg: &ProjectionConfig) -> Result<SvdFactor> {
    let n = g.n();
    cfg.validate(n)?;
    let op = Operator::new(g);
    for attempt in 0..2u64 {
        let seed = derive_seed(&[cfg.seed, attempt]);
        let omega = gaussian_matrix(n, cfg.rank + cfg.oversample_s, derive_seed(&[seed, 0]));
        let gamma = gaussian_matrix(n, cfg.rank + cfg.oversample_r, derive_seed(&[seed, 1]));
        let Some(q) = range_basis(&op, omega, cfg.power_q, false) else {
            continue;
        };
        let Some(t) = range_basis(&op, gamma, cfg.power_q, true) else {
            continue;
        };
        let at = op.apply(&t);
        let core = q.transpose_matmul(&at)?;
        let (us, s, vs) = linalg::svd(&core);
        let k = cfg.rank.min(s.len());
        let mut u = q.matmul(&us.leading_columns(k))?;
        let mut v = t.matmul(&vs.leading_columns(k))?;
        linalg::normalize_signs(&mut u, &mut v);
        return Ok(SvdFactor {
            u,
            sigma: s[..k].to_vec(),
            v,
            converged: true,
            iterations: cfg.power_q,
        });
    }
    Err(Error::DegenerateSketch(format!(
        "sketch collapsed twice for rank {} on a graph with {} edges",
        cfg.rank,
        g.nnz()
    )))
}

/// Orthonormal basis for `(A A^T)^q A test` (or the transposed variant).
fn range_basis(op: &Operator, test: DenseMatrix, power_q: usize, transposed: bool) -> Option<DenseMatrix> {
    let forward = |m: &DenseMatrix| if transposed { op.apply_t(m) } else { op.apply(m) };
    let backward = |m: &DenseMatrix| if transposed { op.apply(m) } else { op.apply_t(m) };
    let mut basis = orthonormalize(forward(&test), op.nnz() > 0)?;
    for _ in 0..power_q {
        let back = orthonormalize(backward(&basis), op.nnz() > 0)?;
        basis = orthonormalize(forward(&back), op.nnz() > 0)?;
    }
    Some(basis)
}

fn orthonormalize(sketch: DenseMatrix, expect_nonzero: bool) -> Option<DenseMatrix> {
    if !sketch.is_finite() {
        return None;
    }
    let (q, r) = linalg::thin_qr(&sketch);
    if expect_nonzero && linalg::r_rank(&r, 1e-14) == 0 {
        return None;
    }
    q.is_finite().then_some(q)
}
