//! Stochastic co-block models and their population quantities.
//!
//! Memberships are contiguous: the first `row_sizes[0]` nodes form row
//! cluster 0, the next `row_sizes[1]` form row cluster 1, and so on; column
//! clusters are laid out the same way from `col_sizes`.
//!
//! # Generation stream order
//!
//! Row `i` draws from stream `i` of the ChaCha8 generator keyed by the seed
//! (see [`crate::rng`]). Within a row, column blocks are visited in
//! ascending order. Inside block `l` the row's edge probability is
//! `q = theta_y[i] * B[k][l]`; candidate columns are produced in ascending
//! order by geometric gaps `floor(ln(u) / ln(1 - q))`, one uniform `u` per
//! candidate. A candidate `j` equal to `i` is dropped. When `theta_z[j] < 1`
//! one more uniform `v` is drawn and the candidate kept iff
//! `v < theta_z[j]`. Every off-diagonal entry is therefore an independent
//! Bernoulli with probability `theta_y[i] * theta_z[j] * B[k][l]`, and
//! all-one propensities consume exactly the draws of the plain model.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{dot, norm, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::{SparseDirectedGraph, DENSE_GUARD};
use crate::linalg;
use crate::rng;

/// Relative tolerance for rank decisions against the largest singular value.
pub const RANK_TOL: f64 = 1e-10;

const IDENTIFIABILITY_TOL: f64 = 1e-12;

/// Stochastic co-block model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScbmSpec {
    n: usize,
    b: DenseMatrix,
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
}

/// Degree-corrected stochastic co-block model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DcScbmSpec {
    base: ScbmSpec,
    theta_y: Vec<f64>,
    theta_z: Vec<f64>,
}

/// Row (sender) and column (receiver) labels for every node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipPair {
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

/// Singular structure of the population matrix and the derived separation
/// and heterogeneity quantities.
#[derive(Debug, Clone)]
pub struct PopulationStructure {
    /// n x Ky left singular vectors of P.
    pub u_bar: DenseMatrix,
    /// n x Ky right singular vectors of P.
    pub v_bar: DenseMatrix,
    /// The Ky nonzero singular values, non-increasing.
    pub sigma: Vec<f64>,
    /// Minimum over row-cluster pairs of `sqrt(1/n_k + 1/n_l)`.
    pub tau: f64,
    /// `min_{k != l} |B_k - B_l| * min_i sqrt(n_i^y) / sigma_max` over columns of B.
    pub delta: f64,
    /// Per-row-cluster heterogeneity; all ones without degree correction.
    pub kappa_y: Vec<f64>,
    /// Per-column-cluster heterogeneity.
    pub kappa_z: Vec<f64>,
    /// Largest cosine between distinct column-cluster directions.
    pub eta: f64,
    /// Largest edge probability.
    pub alpha_n: f64,
    /// Kz x Ky matrix whose row `k` is the direction of column cluster `k`
    /// in the right singular space: `Sigma^{-1} H^T Bt_{*k}` where
    /// `Bt = Psi^y B Psi^z = H Sigma J^T`.
    pub col_directions: DenseMatrix,
    pub row_sizes: Vec<usize>,
    pub col_sizes: Vec<usize>,
}

impl PopulationStructure {
    /// Largest nonzero singular value of P.
    pub fn sigma_n(&self) -> f64 {
        self.sigma[0]
    }

    /// Smallest nonzero singular value of P.
    pub fn gamma_n(&self) -> f64 {
        *self.sigma.last().expect("Ky >= 1")
    }
}

impl ScbmSpec {
    /// Validated spec. `b` is Ky x Kz with Ky <= Kz and rank Ky.
    pub fn new(n: usize, b: DenseMatrix, row_sizes: Vec<usize>, col_sizes: Vec<usize>) -> Result<Self> {
        let spec = Self::new_unranked(n, b, row_sizes, col_sizes)?;
        let ky = spec.ky();
        let rank = numerical_rank(&linalg::singular_values(&spec.b));
        if rank != ky {
            return Err(Error::validation(
                "b",
                format!("rank(B) = {rank}, expected Ky = {ky}"),
            ));
        }
        Ok(spec)
    }

    /// Like [`ScbmSpec::new`] but without the `rank(B) = Ky` check. Such a
    /// spec can be sampled; [`population_structure`] reports it as degenerate.
    pub fn new_unranked(
        n: usize,
        b: DenseMatrix,
        row_sizes: Vec<usize>,
        col_sizes: Vec<usize>,
    ) -> Result<Self> {
        let (ky, kz) = b.shape();
        if ky == 0 {
            return Err(Error::validation("b", "needs at least one row cluster"));
        }
        if ky > kz {
            return Err(Error::validation("b", format!("Ky = {ky} exceeds Kz = {kz}")));
        }
        if b.as_slice().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::validation("b", "entries must lie in [0, 1]"));
        }
        check_sizes("row_sizes", &row_sizes, ky, n)?;
        check_sizes("col_sizes", &col_sizes, kz, n)?;
        Ok(Self {
            n,
            b,
            row_sizes,
            col_sizes,
        })
    }

    /// Balanced spec with `alpha` on the diagonal and `alpha (1 - lambda)` elsewhere.
    pub fn four_parameter(n: usize, k: usize, alpha: f64, lambda: f64) -> Result<Self> {
        if k == 0 || !n.is_multiple_of(k) {
            return Err(Error::validation("k", format!("K = {k} must divide n = {n}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::validation("alpha", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::validation("lambda", "must lie in [0, 1]"));
        }
        let off = alpha * (1.0 - lambda);
        let b = DenseMatrix::from_fn(k, k, |i, j| if i == j { alpha } else { off });
        Self::new(n, b, vec![n / k; k], vec![n / k; k])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ky(&self) -> usize {
        self.b.rows()
    }

    pub fn kz(&self) -> usize {
        self.b.cols()
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn row_sizes(&self) -> &[usize] {
        &self.row_sizes
    }

    pub fn col_sizes(&self) -> &[usize] {
        &self.col_sizes
    }

    /// Contiguous-block memberships.
    pub fn memberships(&self) -> MembershipPair {
        MembershipPair {
            y: contiguous_labels(&self.row_sizes),
            z: contiguous_labels(&self.col_sizes),
        }
    }

    /// Largest entry of B.
    pub fn alpha_n(&self) -> f64 {
        self.b.max_abs()
    }
}

impl DcScbmSpec {
    pub fn new(base: ScbmSpec, theta_y: Vec<f64>, theta_z: Vec<f64>) -> Result<Self> {
        let n = base.n;
        for (field, theta, sizes) in [
            ("theta_y", &theta_y, &base.row_sizes),
            ("theta_z", &theta_z, &base.col_sizes),
        ] {
            if theta.len() != n {
                return Err(Error::validation(field, format!("length {} != n = {n}", theta.len())));
            }
            if theta.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::validation(field, "propensities must be positive and finite"));
            }
            let mut start = 0;
            for (k, &size) in sizes.iter().enumerate() {
                let max = theta[start..start + size].iter().cloned().fold(0.0, f64::max);
                if (max - 1.0).abs() > IDENTIFIABILITY_TOL {
                    return Err(Error::validation(
                        field,
                        format!("maximum over cluster {k} is {max}, must be 1"),
                    ));
                }
                start += size;
            }
        }
        let spec = Self {
            base,
            theta_y,
            theta_z,
        };
        let (ty_max, tz_max) = (spec.cluster_max(true), spec.cluster_max(false));
        for k in 0..spec.base.ky() {
            for l in 0..spec.base.kz() {
                let p = ty_max[k] * tz_max[l] * spec.base.b[(k, l)];
                if p > 1.0 {
                    return Err(Error::validation(
                        "theta",
                        format!("edge probability {p} > 1 in block ({k}, {l})"),
                    ));
                }
            }
        }
        Ok(spec)
    }

    /// Scale each cluster's propensities so its maximum is one.
    pub fn normalized(base: ScbmSpec, mut theta_y: Vec<f64>, mut theta_z: Vec<f64>) -> Result<Self> {
        for (theta, sizes) in [(&mut theta_y, &base.row_sizes), (&mut theta_z, &base.col_sizes)] {
            let mut start = 0;
            for &size in sizes {
                if start + size > theta.len() {
                    break;
                }
                let block = &mut theta[start..start + size];
                let max = block.iter().cloned().fold(0.0, f64::max);
                if max > 0.0 {
                    block.iter_mut().for_each(|t| *t /= max);
                }
                start += size;
            }
        }
        Self::new(base, theta_y, theta_z)
    }

    pub fn base(&self) -> &ScbmSpec {
        &self.base
    }

    pub fn theta_y(&self) -> &[f64] {
        &self.theta_y
    }

    pub fn theta_z(&self) -> &[f64] {
        &self.theta_z
    }

    fn cluster_max(&self, rows: bool) -> Vec<f64> {
        let (theta, sizes) = if rows {
            (&self.theta_y, &self.base.row_sizes)
        } else {
            (&self.theta_z, &self.base.col_sizes)
        };
        let mut start = 0;
        sizes
            .iter()
            .map(|&s| {
                let m = theta[start..start + s].iter().cloned().fold(0.0, f64::max);
                start += s;
                m
            })
            .collect()
    }
}

/// Common view over plain and degree-corrected models.
pub trait BlockModel {
    fn base(&self) -> &ScbmSpec;
    fn theta_y(&self) -> Option<&[f64]>;
    fn theta_z(&self) -> Option<&[f64]>;
}

impl BlockModel for ScbmSpec {
    fn base(&self) -> &ScbmSpec {
        self
    }
    fn theta_y(&self) -> Option<&[f64]> {
        None
    }
    fn theta_z(&self) -> Option<&[f64]> {
        None
    }
}

impl BlockModel for DcScbmSpec {
    fn base(&self) -> &ScbmSpec {
        &self.base
    }
    fn theta_y(&self) -> Option<&[f64]> {
        Some(&self.theta_y)
    }
    fn theta_z(&self) -> Option<&[f64]> {
        Some(&self.theta_z)
    }
}

/// Either model, as read from a spec file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Scbm(ScbmSpec),
    DcScbm(DcScbmSpec),
}

impl BlockModel for ModelSpec {
    fn base(&self) -> &ScbmSpec {
        match self {
            ModelSpec::Scbm(s) => s,
            ModelSpec::DcScbm(s) => s.base(),
        }
    }
    fn theta_y(&self) -> Option<&[f64]> {
        match self {
            ModelSpec::Scbm(_) => None,
            ModelSpec::DcScbm(s) => Some(s.theta_y()),
        }
    }
    fn theta_z(&self) -> Option<&[f64]> {
        match self {
            ModelSpec::Scbm(_) => None,
            ModelSpec::DcScbm(s) => Some(s.theta_z()),
        }
    }
}

/// JSON layout of a model spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpecFile {
    pub n: usize,
    pub ky: usize,
    pub kz: usize,
    pub b: Vec<Vec<f64>>,
    pub row_sizes: Vec<usize>,
    pub col_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_z: Option<Vec<f64>>,
}

impl ModelSpecFile {
    /// Fully validated model, including `rank(B) = Ky`.
    pub fn into_model(self) -> Result<ModelSpec> {
        self.build(true)
    }

    /// Model valid for sampling; `rank(B)` is not checked.
    pub fn into_sampling_model(self) -> Result<ModelSpec> {
        self.build(false)
    }

    fn build(self, require_rank: bool) -> Result<ModelSpec> {
        if self.b.len() != self.ky || self.b.iter().any(|r| r.len() != self.kz) {
            return Err(Error::validation(
                "b",
                format!("must be a {} x {} matrix", self.ky, self.kz),
            ));
        }
        let b = DenseMatrix::from_rows(&self.b)?;
        let base = if require_rank {
            ScbmSpec::new(self.n, b, self.row_sizes, self.col_sizes)?
        } else {
            ScbmSpec::new_unranked(self.n, b, self.row_sizes, self.col_sizes)?
        };
        match (self.theta_y, self.theta_z) {
            (None, None) => Ok(ModelSpec::Scbm(base)),
            (Some(ty), Some(tz)) => Ok(ModelSpec::DcScbm(DcScbmSpec::new(base, ty, tz)?)),
            (Some(_), None) => Err(Error::validation("theta_z", "required when theta_y is given")),
            (None, Some(_)) => Err(Error::validation("theta_y", "required when theta_z is given")),
        }
    }

    pub fn from_model(model: &impl BlockModel) -> Self {
        let base = model.base();
        Self {
            n: base.n,
            ky: base.ky(),
            kz: base.kz(),
            b: (0..base.ky()).map(|k| base.b.row(k).to_vec()).collect(),
            row_sizes: base.row_sizes.clone(),
            col_sizes: base.col_sizes.clone(),
            theta_y: model.theta_y().map(<[f64]>::to_vec),
            theta_z: model.theta_z().map(<[f64]>::to_vec),
        }
    }
}

impl ModelSpec {
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let file: ModelSpecFile = serde_json::from_reader(reader)?;
        file.into_model()
    }

    pub fn generate(&self, seed: u64) -> Result<(SparseDirectedGraph, MembershipPair)> {
        match self {
            ModelSpec::Scbm(s) => generate_scbm(s, seed),
            ModelSpec::DcScbm(s) => generate_dc_scbm(s, seed),
        }
    }
}

fn check_sizes(field: &'static str, sizes: &[usize], k: usize, n: usize) -> Result<()> {
    if sizes.len() != k {
        return Err(Error::validation(field, format!("expected {k} entries, got {}", sizes.len())));
    }
    if sizes.contains(&0) {
        return Err(Error::validation(field, "every cluster must be non-empty"));
    }
    let total: usize = sizes.iter().sum();
    if total != n {
        return Err(Error::validation(field, format!("sizes sum to {total}, expected n = {n}")));
    }
    Ok(())
}

fn numerical_rank(singular_values: &[f64]) -> usize {
    let top = singular_values.first().cloned().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > RANK_TOL * top).count()
}

fn contiguous_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
        .collect()
}

fn block_bounds(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let b = (start, start + s);
            start += s;
            b
        })
        .collect()
}

/// Draw an ScBM adjacency matrix.
pub fn generate_scbm(spec: &ScbmSpec, seed: u64) -> Result<(SparseDirectedGraph, MembershipPair)> {
    Ok((sample_blocks(spec, None, None, seed), spec.memberships()))
}

/// Draw a DC-ScBM adjacency matrix.
pub fn generate_dc_scbm(spec: &DcScbmSpec, seed: u64) -> Result<(SparseDirectedGraph, MembershipPair)> {
    Ok((
        sample_blocks(&spec.base, Some(&spec.theta_y), Some(&spec.theta_z), seed),
        spec.base.memberships(),
    ))
}

fn sample_blocks(
    spec: &ScbmSpec,
    theta_y: Option<&[f64]>,
    theta_z: Option<&[f64]>,
    seed: u64,
) -> SparseDirectedGraph {
    let n = spec.n;
    let labels = contiguous_labels(&spec.row_sizes);
    let blocks = block_bounds(&spec.col_sizes);
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let k = labels[i];
            let ty = theta_y.map_or(1.0, |t| t[i]);
            let mut cols = Vec::new();
            for (l, &(start, end)) in blocks.iter().enumerate() {
                let q = ty * spec.b[(k, l)];
                if q <= 0.0 {
                    continue;
                }
                let mut accept = |j: usize, rng: &mut rand_chacha::ChaCha8Rng| {
                    if j == i {
                        return;
                    }
                    if let Some(tz) = theta_z {
                        if tz[j] < 1.0 && rand::Rng::gen::<f64>(rng) >= tz[j] {
                            return;
                        }
                    }
                    cols.push(j);
                };
                if q >= 1.0 {
                    for j in start..end {
                        accept(j, &mut rng);
                    }
                    continue;
                }
                let log_miss = (-q).ln_1p();
                let mut next = start;
                loop {
                    let u = rng::open_unit(&mut rng);
                    let gap = (u.ln() / log_miss).floor();
                    if gap >= (end - next) as f64 {
                        break;
                    }
                    let j = next + gap as usize;
                    accept(j, &mut rng);
                    next = j + 1;
                    if next >= end {
                        break;
                    }
                }
            }
            cols
        })
        .collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let total: usize = rows.iter().map(Vec::len).sum();
    let mut col_indices = Vec::with_capacity(total);
    for row in rows {
        col_indices.extend(row);
        row_offsets.push(col_indices.len());
    }
    let values = vec![1.0; col_indices.len()];
    SparseDirectedGraph::from_parts_unchecked(n, row_offsets, col_indices, values)
}

/// Dense population matrix `P = diag(theta_y) Y B Z^T diag(theta_z)`,
/// diagonal included.
pub fn population_matrix(model: &impl BlockModel) -> Result<DenseMatrix> {
    let base = model.base();
    let n = base.n;
    if n > DENSE_GUARD {
        return Err(Error::Capacity {
            n,
            limit: DENSE_GUARD,
        });
    }
    let y = contiguous_labels(&base.row_sizes);
    let z = contiguous_labels(&base.col_sizes);
    let (ty, tz) = (model.theta_y(), model.theta_z());
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let p = base.b[(y[i], z[j])];
        match (ty, tz) {
            (Some(ty), Some(tz)) => ty[i] * tz[j] * p,
            _ => p,
        }
    }))
}

/// Weighted graph whose stored values are the positive entries of P.
pub fn population_graph(model: &impl BlockModel) -> Result<SparseDirectedGraph> {
    SparseDirectedGraph::from_dense(&population_matrix(model)?)
}

/// Expected number of edges, `sum_{i != j} P_ij`.
pub fn expected_edge_count(model: &impl BlockModel) -> f64 {
    let base = model.base();
    let y = contiguous_labels(&base.row_sizes);
    let z = contiguous_labels(&base.col_sizes);
    let ones_y = vec![1.0; base.n];
    let ones_z = vec![1.0; base.n];
    let ty = model.theta_y().unwrap_or(&ones_y);
    let tz = model.theta_z().unwrap_or(&ones_z);
    // sum over all pairs by block, then remove the diagonal
    let mut row_mass = vec![0.0; base.ky()];
    for i in 0..base.n {
        row_mass[y[i]] += ty[i];
    }
    let mut col_mass = vec![0.0; base.kz()];
    for j in 0..base.n {
        col_mass[z[j]] += tz[j];
    }
    let mut total = 0.0;
    for k in 0..base.ky() {
        for l in 0..base.kz() {
            total += row_mass[k] * col_mass[l] * base.b[(k, l)];
        }
    }
    let diag: f64 = (0..base.n).map(|i| ty[i] * tz[i] * base.b[(y[i], z[i])]).sum();
    total - diag
}

/// Exact dense SVD of P truncated to Ky factors, plus the derived quantities.
pub fn population_structure(model: &impl BlockModel) -> Result<PopulationStructure> {
    let base = model.base();
    let (n, ky, kz) = (base.n, base.ky(), base.kz());
    let p = population_matrix(model)?;
    let (u, s, v) = linalg::svd(&p);
    let top = s.first().cloned().unwrap_or(0.0);
    if top == 0.0 || s.len() < ky || s[ky - 1] <= RANK_TOL * top {
        return Err(Error::DegenerateModel(format!(
            "numerical rank of P is below Ky = {ky}"
        )));
    }
    let mut u_bar = u.leading_columns(ky);
    let mut v_bar = v.leading_columns(ky);
    linalg::normalize_signs(&mut u_bar, &mut v_bar);
    let sigma: Vec<f64> = s[..ky].to_vec();
    let sigma_n = sigma[0];

    let row_sizes = base.row_sizes.clone();
    let col_sizes = base.col_sizes.clone();

    let mut tau = f64::INFINITY;
    for k in 0..ky {
        for l in 0..ky {
            if k != l {
                let d = (1.0 / row_sizes[k] as f64 + 1.0 / row_sizes[l] as f64).sqrt();
                tau = tau.min(d);
            }
        }
    }

    let min_row_root = row_sizes.iter().map(|&s| (s as f64).sqrt()).fold(f64::INFINITY, f64::min);
    let mut min_col_gap = f64::INFINITY;
    for k in 0..kz {
        for l in 0..kz {
            if k != l {
                let gap: f64 = (0..ky)
                    .map(|r| (base.b[(r, k)] - base.b[(r, l)]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                min_col_gap = min_col_gap.min(gap);
            }
        }
    }
    let delta = min_col_gap * min_row_root / sigma_n;

    // Propensity norms per cluster (Psi) and normalized propensities.
    let ones = vec![1.0; n];
    let ty = model.theta_y().unwrap_or(&ones);
    let tz = model.theta_z().unwrap_or(&ones);
    let y = contiguous_labels(&row_sizes);
    let z = contiguous_labels(&col_sizes);
    let psi_y = cluster_norms(ty, &y, ky);
    let psi_z = cluster_norms(tz, &z, kz);
    let kappa_y = heterogeneity(ty, &y, &psi_y, &row_sizes);
    let kappa_z_raw = heterogeneity(tz, &z, &psi_z, &col_sizes);

    let b_tilde = DenseMatrix::from_fn(ky, kz, |k, l| psi_y[k] * base.b[(k, l)] * psi_z[l]);
    let (h, _, _) = linalg::svd(&b_tilde);
    // Column-cluster directions expressed in H's coordinates and scaled by Sigma^{-1}.
    let ht_b = h.transpose_matmul(&b_tilde)?;
    let col_directions = DenseMatrix::from_fn(kz, ky, |l, r| ht_b[(r, l)] / sigma[r]);
    let kappa_z: Vec<f64> = (0..kz)
        .map(|l| {
            let len = norm(col_directions.row(l));
            kappa_z_raw[l] / (len * len)
        })
        .collect();
    let mut eta = -1.0f64;
    for k in 0..kz {
        for l in 0..kz {
            if k != l {
                let (a, b) = (col_directions.row(k), col_directions.row(l));
                eta = eta.max(dot(a, b) / (norm(a) * norm(b)));
            }
        }
    }

    let alpha_n = match (model.theta_y(), model.theta_z()) {
        (Some(_), Some(_)) => p.max_abs(),
        _ => base.alpha_n(),
    };

    Ok(PopulationStructure {
        u_bar,
        v_bar,
        sigma,
        tau,
        delta,
        kappa_y,
        kappa_z,
        eta,
        alpha_n,
        col_directions,
        row_sizes,
        col_sizes,
    })
}

fn cluster_norms(theta: &[f64], labels: &[usize], k: usize) -> Vec<f64> {
    let mut sq = vec![0.0; k];
    for (t, &g) in theta.iter().zip(labels) {
        sq[g] += t * t;
    }
    sq.into_iter().map(f64::sqrt).collect()
}

// (n_k)^{-2} * sum_{i in G_k} (theta_i / psi_k)^{-2}
fn heterogeneity(theta: &[f64], labels: &[usize], psi: &[f64], sizes: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0; sizes.len()];
    for (t, &g) in theta.iter().zip(labels) {
        let normalized = t / psi[g];
        acc[g] += 1.0 / (normalized * normalized);
    }
    acc.iter()
        .zip(sizes)
        .map(|(a, &s)| a / (s as f64 * s as f64))
        .collect()
}
