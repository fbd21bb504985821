use crate::error::{Error, Result};
use crate::graph::SparseDirectedGraph;
use crate::linalg;

use super::{gaussian_matrix, Operator, SvdFactor};

/// Extra block columns carried beyond the requested rank.
pub const ITERATIVE_BLOCK_EXTRA: usize = 10;

const START_SEED: u64 = 0x005E_ED0F_B10C;

/// Floor on the Ritz-value denominator, relative to the largest one, so that
/// numerically zero singular values do not block convergence.
const RELATIVE_FLOOR: f64 = 1e-6;

/// Leading `rank` singular triplets by block subspace iteration.
///
/// Each sweep computes `U = orth(A V)` and `W = A^T U = V' R`. Because
/// `U^T A V' = R^T`, the Ritz values are the singular values of `R`, and the
/// Ritz vectors follow from its small SVD. Iteration stops once every one of
/// the `rank` leading Ritz values changes by less than `tol` relative to its
/// value. Reaching `max_iter` returns the last iterate with
/// `converged = false`.
pub fn iterative_partial_svd(
    g: &SparseDirectedGraph,
    rank: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SvdFactor> {
    let n = g.n();
    if rank == 0 || rank > n {
        return Err(Error::validation("rank", format!("must lie in [1, {n}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::validation("tol", "must be positive"));
    }
    let op = Operator::new(g);
    let block = (rank + ITERATIVE_BLOCK_EXTRA).min(n);
    let (mut v, _) = linalg::thin_qr(&gaussian_matrix(n, block, START_SEED));
    let mut previous: Option<Vec<f64>> = None;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (u, _) = linalg::thin_qr(&op.apply(&v));
        let (v_next, r) = linalg::thin_qr(&op.apply_t(&u));
        let (x, s, y) = linalg::svd(&r.transpose());
        let ritz = &s[..rank];
        let converged = match &previous {
            Some(prev) => ritz_converged(prev, ritz, tol),
            None => false,
        };
        if converged || iterations >= max_iter.max(1) {
            let mut u_out = u.matmul(&x.leading_columns(rank))?;
            let mut v_out = v_next.matmul(&y.leading_columns(rank))?;
            linalg::normalize_signs(&mut u_out, &mut v_out);
            return Ok(SvdFactor {
                u: u_out,
                sigma: ritz.to_vec(),
                v: v_out,
                converged,
                iterations,
            });
        }
        previous = Some(ritz.to_vec());
        v = v_next;
    }
}

fn ritz_converged(prev: &[f64], next: &[f64], tol: f64) -> bool {
    let top = next.first().cloned().unwrap_or(0.0);
    if top == 0.0 {
        return prev.iter().all(|&p| p == 0.0);
    }
    let floor = RELATIVE_FLOOR * top;
    prev.iter()
        .zip(next)
        .all(|(&p, &s)| (s - p).abs() <= tol * s.max(floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn diagonal_graph() {
        let g = SparseDirectedGraph::from_triplets(3, vec![(0, 0, 3.0), (1, 1, 2.0), (2, 2, 1.0)]).unwrap();
        let f = iterative_partial_svd(&g, 3, 1e-10, 100).unwrap();
        assert!(f.converged);
        for (s, e) in f.sigma.iter().zip([3.0, 2.0, 1.0]) {
            assert!((s - e).abs() < 1e-12);
        }
        let eye = DenseMatrix::identity(3);
        assert!(f.u.max_abs_diff(&eye) < 1e-10);
        assert!(f.v.max_abs_diff(&eye) < 1e-10);
    }

    #[test]
    fn random_graph_matches_dense_oracle() {
        use rand::Rng;
        let n = 60;
        let mut rng = crate::rng::stream(12, 0);
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if rng.gen::<f64>() < 0.2 {
                    triplets.push((i, j, 1.0));
                }
            }
        }
        let g = SparseDirectedGraph::from_triplets(n, triplets).unwrap();
        let f = iterative_partial_svd(&g, 5, 1e-12, 5000).unwrap();
        assert!(f.converged);
        let oracle = linalg::singular_values(&g.to_dense().unwrap());
        for k in 0..5 {
            assert!((f.sigma[k] - oracle[k]).abs() <= 1e-6, "{k}: {} vs {}", f.sigma[k], oracle[k]);
        }
        assert!(orthonormality_defect(&f.u) <= 1e-8);
        assert!(orthonormality_defect(&f.v) <= 1e-8);
    }

    #[test]
    fn empty_graph() {
        let g = SparseDirectedGraph::empty(8);
        let f = iterative_partial_svd(&g, 3, 1e-8, 50).unwrap();
        assert!(f.sigma.iter().all(|&s| s == 0.0));
        assert!(orthonormality_defect(&f.u) <= 1e-8);
        assert!(orthonormality_defect(&f.v) <= 1e-8);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        use rand::Rng;
        let n = 80;
        let mut rng = crate::rng::stream(3, 1);
        let triplets = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|_| rng.gen::<f64>() < 0.1)
            .map(|(i, j)| (i, j, 1.0))
            .collect();
        let g = SparseDirectedGraph::from_triplets(n, triplets).unwrap();
        let f = iterative_partial_svd(&g, 4, 1e-14, 2).unwrap();
        assert!(!f.converged);
        assert_eq!(f.iterations, 2);
        assert!(orthonormality_defect(&f.u) <= 1e-8);
    }

    #[test]
    fn rank_beyond_numerical_rank() {
        let g = SparseDirectedGraph::from_triplets(6, vec![(0, 1, 2.0), (2, 3, 1.0)]).unwrap();
        let f = iterative_partial_svd(&g, 4, 1e-8, 200).unwrap();
        assert!((f.sigma[0] - 2.0).abs() < 1e-12);
        assert!((f.sigma[1] - 1.0).abs() < 1e-12);
        assert!(f.sigma[2] < 1e-12 && f.sigma[3] < 1e-12);
        assert!(orthonormality_defect(&f.u) <= 1e-8);
        assert!(orthonormality_defect(&f.v) <= 1e-8);
    }

    #[test]
    fn rejects_bad_rank() {
        let g = SparseDirectedGraph::empty(3);
        assert!(iterative_partial_svd(&g, 0, 1e-8, 10).is_err());
        assert!(iterative_partial_svd(&g, 4, 1e-8, 10).is_err());
    }
}
