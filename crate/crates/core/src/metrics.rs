//! Approximation error, misclustering rate, and the misclustering rate
//! expressions of the consistency results.

use serde::{Deserialize, Serialize};

use crate::dense::{dot, norm, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::{SparseDirectedGraph, DENSE_GUARD};
use crate::models::PopulationStructure;
use crate::randsvd::SvdFactor;
use crate::rng::{stream, Gaussian};

const NORM_START_SEED: u64 = 0x005e_ed0f_5ec7;

/// Result of a power-iteration norm estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of `m` by power iteration on `m^T m`.
///
/// Stops when `|m^T m v - lambda v| <= tol * lambda`; the start vector is a
/// fixed-seed Gaussian so repeated calls agree bitwise.
pub fn spectral_norm(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<NormEstimate> {
    if !m.is_finite() {
        return Err(Error::validation("matrix", "entries must be finite"));
    }
    let cols = m.cols();
    if m.rows() == 0 || cols == 0 || m.max_abs() == 0.0 {
        return Ok(NormEstimate {
            value: 0.0,
            converged: true,
            iterations: 0,
        });
    }
    let mut g = Gaussian::new(stream(NORM_START_SEED, 0));
    let mut v: Vec<f64> = (0..cols).map(|_| g.sample()).collect();
    let r = norm(&v);
    v.iter_mut().for_each(|x| *x /= r);
    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let z = m.transpose_matvec(&m.matvec(&v));
        lambda = dot(&v, &z);
        let residual = z.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        let zn = norm(&z);
        if residual <= tol * lambda || zn == 0.0 {
            return Ok(NormEstimate {
                value: lambda.max(0.0).sqrt(),
                converged: true,
                iterations: it,
            });
        }
        v = z.into_iter().map(|x| x / zn).collect();
    }
    Ok(NormEstimate {
        value: lambda.max(0.0).sqrt(),
        converged: false,
        iterations: max_iter,
    })
}

/// Anything that can be compared against the population matrix.
pub enum Approximation<'a> {
    Factor(&'a SvdFactor),
    Graph(&'a SparseDirectedGraph),
}

impl<'a> From<&'a SvdFactor> for Approximation<'a> {
    fn from(f: &'a SvdFactor) -> Self {
        Approximation::Factor(f)
    }
}

impl<'a> From<&'a SparseDirectedGraph> for Approximation<'a> {
    fn from(g: &'a SparseDirectedGraph) -> Self {
        Approximation::Graph(g)
    }
}

/// `|A~ - P|_2` for a factorization or a (possibly sparsified) graph.
pub fn approximation_error<'a>(approx: impl Into<Approximation<'a>>, p: &DenseMatrix) -> Result<f64> {
    let n = p.rows();
    if n > DENSE_GUARD {
        return Err(Error::Capacity { n, limit: DENSE_GUARD });
    }
    let dense = match approx.into() {
        Approximation::Factor(f) => f.reconstruct()?,
        Approximation::Graph(g) => g.to_dense()?,
    };
    let diff = dense.sub(p)?;
    Ok(spectral_norm(&diff, 1e-9, 5000)?.value)
}

/// Fraction of nodes misassigned under the best matching of estimated to
/// true labels.
pub fn misclustering_rate(est: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::validation(
            "labels",
            format!("lengths differ: {} vs {}", est.len(), truth.len()),
        ));
    }
    if k == 0 {
        return Err(Error::validation("k", "must be at least 1"));
    }
    if let Some(&bad) = est.iter().chain(truth).find(|&&l| l >= k) {
        return Err(Error::validation("labels", format!("label {bad} is not below k = {k}")));
    }
    if est.is_empty() {
        return Ok(0.0);
    }
    let mut confusion = vec![vec![0i64; k]; k];
    for (&e, &t) in est.iter().zip(truth) {
        confusion[e][t] += 1;
    }
    let agreement = max_assignment(&confusion);
    Ok((est.len() as i64 - agreement) as f64 / est.len() as f64)
}

/// Maximum-weight perfect matching on a square integer matrix (Hungarian
/// method with potentials, O(k^3)).
pub(crate) fn max_assignment(w: &[Vec<i64>]) -> i64 {
    let k = w.len();
    let top = w.iter().flatten().copied().max().unwrap_or(0);
    // minimise top - w; 1-based arrays with a virtual column 0
    let cost = |i: usize, j: usize| top - w[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut matched = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        matched[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=k).map(|j| w[matched[j] - 1][j - 1]).sum()
}

/// Right-hand sides of the misclustering bounds with every constant set to
/// one. These are rates, not certified bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub phi: f64,
    pub delta_term: f64,
    pub rp_row_bound: f64,
    pub rp_col_bound: f64,
    pub rs_row_bound: f64,
    pub rs_col_bound: f64,
    pub dc_rp_row_bound: f64,
    pub dc_rp_col_bound: f64,
    pub dc_rs_row_bound: f64,
    pub dc_rs_col_bound: f64,
    /// False when `alpha_n < log(n) / n`, i.e. the sparsity condition fails.
    pub sparsity_condition: bool,
}

/// `sqrt(n a^2 / p) (1 + p^{1/4} max(1, sqrt(1/p - 1)))`
pub fn delta_term(n: usize, alpha_n: f64, p: f64) -> f64 {
    let n = n as f64;
    (n * alpha_n * alpha_n / p).sqrt() * (1.0 + p.powf(0.25) * (1.0f64).max((1.0 / p - 1.0).sqrt()))
}

/// `max{sqrt(n a / p), sqrt(log n) / p, delta_term}`
pub fn phi(n: usize, alpha_n: f64, p: f64) -> f64 {
    let nf = n as f64;
    (nf * alpha_n / p)
        .sqrt()
        .max(nf.ln().sqrt() / p)
        .max(delta_term(n, alpha_n, p))
}

pub fn theoretical_bounds(n: usize, p: f64, alpha_n: f64, s: &PopulationStructure) -> Result<BoundReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::validation("p", format!("{p} is not in (0, 1]")));
    }
    if !(alpha_n > 0.0 && alpha_n <= 1.0) {
        return Err(Error::validation("alpha_n", format!("{alpha_n} is not in (0, 1]")));
    }
    if n < 2 {
        return Err(Error::validation("n", "must be at least 2"));
    }
    let nf = n as f64;
    let ky = s.sigma.len() as f64;
    let gamma = s.gamma_n();
    let phi_v = phi(n, alpha_n, p);
    let tau2 = s.tau * s.tau;
    let delta2 = s.delta * s.delta;
    let weighted = |sizes: &[usize], kappa: &[f64]| {
        sizes
            .iter()
            .zip(kappa)
            .map(|(&m, &kk)| (m as f64).powi(2) * kk)
            .sum::<f64>()
            .sqrt()
    };
    let sy = weighted(&s.row_sizes, &s.kappa_y);
    let sz = weighted(&s.col_sizes, &s.kappa_z);
    let eta_factor = (1.0 - s.eta).sqrt();
    Ok(BoundReport {
        phi: phi_v,
        delta_term: delta_term(n, alpha_n, p),
        rp_row_bound: ky * alpha_n / (tau2 * gamma * gamma),
        rp_col_bound: ky * alpha_n / (delta2 * gamma * gamma),
        rs_row_bound: ky * phi_v * phi_v / (nf * tau2 * gamma * gamma),
        rs_col_bound: ky * phi_v * phi_v / (nf * delta2 * gamma * gamma),
        dc_rp_row_bound: sy * (ky * alpha_n).sqrt() / (gamma * nf.sqrt()),
        dc_rp_col_bound: sz * (ky * alpha_n).sqrt() / (eta_factor * gamma * nf.sqrt()),
        dc_rs_row_bound: sy * ky.sqrt() * phi_v / (gamma * nf),
        dc_rs_col_bound: sz * ky.sqrt() * phi_v / (eta_factor * gamma * nf),
        sparsity_condition: alpha_n >= nf.ln() / nf,
    })
}
