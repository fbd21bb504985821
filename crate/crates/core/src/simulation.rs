//! The three simulation scenarios and a replicate runner shared by the CLI
//! and the acceptance suite.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::cluster::Method;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{SparseDirectedGraph, DENSE_GUARD};
use crate::metrics::{approximation_error, misclustering_rate};
use crate::models::{population_matrix, BlockModel, DcScbmSpec, ModelSpec, ScbmSpec};
use crate::randsvd::{iterative_partial_svd, projection_svd, sparsify, ProjectionConfig, SamplingConfig, SvdFactor};
use crate::rng::{derive_seed, stream};

pub const CSV_HEADER: &str = "scenario,n,rep,method,row_mis,col_mis,approx_err,wall_ms,seed";

/// Sampling rate used by the sampling method in every scenario.
pub const SAMPLE_P: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMethod {
    Original,
    Projection,
    Sampling,
}

impl SimMethod {
    pub const ALL: [SimMethod; 3] = [SimMethod::Original, SimMethod::Projection, SimMethod::Sampling];

    pub fn as_str(self) -> &'static str {
        match self {
            SimMethod::Original => "original",
            SimMethod::Projection => "projection",
            SimMethod::Sampling => "sampling",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub scenario: u8,
    pub n: usize,
    pub rep: usize,
    pub method: SimMethod,
    pub row_mis: f64,
    pub col_mis: f64,
    pub approx_err: Option<f64>,
    pub wall_ms: f64,
    pub seed: u64,
}

impl SimulationRecord {
    pub fn to_csv_row(&self) -> String {
        let err = self.approx_err.map(|e| format!("{e:.16e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{:.16e},{:.16e},{},{:.16e},{}",
            self.scenario,
            self.n,
            self.rep,
            self.method.as_str(),
            self.row_mis,
            self.col_mis,
            err,
            self.wall_ms,
            self.seed
        )
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub scenario: u8,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Compute `|A~ - P|_2` when n is within the dense guard.
    pub approx_err: bool,
    /// Replaces the hard-coded scenario model; `n_list` must then be `[spec.n]`.
    pub override_model: Option<ModelSpec>,
}

impl SimulationConfig {
    pub fn new(scenario: u8, n_list: Vec<usize>, reps: usize, seed: u64) -> Self {
        Self {
            scenario,
            n_list,
            reps,
            seed,
            approx_err: true,
            override_model: None,
        }
    }
}

fn check_scenario(scenario: u8) -> Result<()> {
    if !(1..=3).contains(&scenario) {
        return Err(Error::validation("scenario", format!("{scenario} is not 1, 2 or 3")));
    }
    Ok(())
}

/// The model of a scenario at size `n`. Random parts of the model (B in
/// scenario 2, theta in scenario 3) come from `model_seed`.
pub fn scenario_model(scenario: u8, n: usize, model_seed: u64) -> Result<ModelSpec> {
    check_scenario(scenario)?;
    match scenario {
        1 => Ok(ModelSpec::Scbm(ScbmSpec::four_parameter(n, 3, 0.2, 0.5)?)),
        2 => {
            let sizes = (even_split(n, 2)?, even_split(n, 3)?);
            let mut rng = stream(model_seed, 0);
            // a singular draw has probability zero; redraw rather than fail
            for _ in 0..100 {
                let b = DenseMatrix::from_fn(2, 3, |_, _| rng.gen_range(0.01..0.3));
                match ScbmSpec::new(n, b, sizes.0.clone(), sizes.1.clone()) {
                    Ok(spec) => return Ok(ModelSpec::Scbm(spec)),
                    Err(Error::Validation { field: "b", .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::DegenerateModel("no full-rank B after 100 draws".into()))
        }
        _ => {
            let b = DenseMatrix::from_rows(&[vec![0.2, 0.1, 0.1], vec![0.1, 0.2, 0.3]])?;
            let base = ScbmSpec::new(n, b, even_split(n, 2)?, even_split(n, 3)?)?;
            let mut rng = stream(model_seed, 1);
            let mut draw = || -> Vec<f64> {
                (0..n).map(|_| if rng.gen::<f64>() < 0.2 { 1.0 } else { 0.2 }).collect()
            };
            let (ty, tz) = (draw(), draw());
            Ok(ModelSpec::DcScbm(DcScbmSpec::normalized(base, ty, tz)?))
        }
    }
}

fn even_split(n: usize, k: usize) -> Result<Vec<usize>> {
    if n == 0 || !n.is_multiple_of(k) {
        return Err(Error::validation("n", format!("{n} is not a positive multiple of {k}")));
    }
    Ok(vec![n / k; k])
}

/// Seed of one replicate: a hash of the master seed, scenario, size and index.
pub fn replicate_seed(master: u64, scenario: u8, n: usize, rep: usize) -> u64 {
    derive_seed(&[master, scenario as u64, n as u64, rep as u64])
}

/// One replicate: a single graph, all three methods, one record per method.
pub fn run_replicate(
    scenario: u8,
    model: &ModelSpec,
    method: Method,
    rep: usize,
    rep_seed: u64,
    approx_err: bool,
) -> Result<Vec<SimulationRecord>> {
    let base = model.base();
    let (n, ky, kz) = (base.n(), base.ky(), base.kz());
    let (g, truth) = model.generate(derive_seed(&[rep_seed, 0]))?;
    let p = if approx_err && n <= DENSE_GUARD {
        Some(population_matrix(model)?)
    } else {
        None
    };
    let cluster_seed = derive_seed(&[rep_seed, 3]);
    let mut out = Vec::with_capacity(3);
    for which in SimMethod::ALL {
        let start = Instant::now();
        let (svd, sparse): (SvdFactor, Option<SparseDirectedGraph>) = match which {
            SimMethod::Original => (exact(&g, ky)?, None),
            SimMethod::Projection => {
                let mut cfg = ProjectionConfig::new(ky, derive_seed(&[rep_seed, 1]));
                cfg.rank = ky;
                (projection_svd(&g, &cfg)?, None)
            }
            SimMethod::Sampling => {
                let s = sparsify(&g, SAMPLE_P, derive_seed(&[rep_seed, 2]))?;
                (exact(&s, ky)?, Some(s))
            }
        };
        let rows = method.run(&svd.u, ky, derive_seed(&[cluster_seed, 1]))?;
        let cols = method.run(&svd.v, kz, derive_seed(&[cluster_seed, 2]))?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let approx = match &p {
            None => None,
            Some(p) => Some(match which {
                SimMethod::Original => approximation_error(&g, p)?,
                SimMethod::Projection => approximation_error(&svd, p)?,
                SimMethod::Sampling => approximation_error(sparse.as_ref().expect("sampled graph"), p)?,
            }),
        };
        out.push(SimulationRecord {
            scenario,
            n,
            rep,
            method: which,
            row_mis: misclustering_rate(&rows.labels, &truth.y, ky)?,
            col_mis: misclustering_rate(&cols.labels, &truth.z, kz)?,
            approx_err: approx,
            wall_ms,
            seed: rep_seed,
        });
    }
    Ok(out)
}

fn exact(g: &SparseDirectedGraph, rank: usize) -> Result<SvdFactor> {
    iterative_partial_svd(g, rank, SamplingConfig::DEFAULT_TOL, SamplingConfig::DEFAULT_MAX_ITER)
}

/// Clustering method used by a scenario: spherical k-median under degree
/// correction, k-means otherwise.
pub fn scenario_method(model: &ModelSpec) -> Method {
    match model {
        ModelSpec::Scbm(_) => Method::KMeans,
        ModelSpec::DcScbm(_) => Method::SphericalKMedian,
    }
}

/// All replicates in `(n, rep, method)` order. Replicates run in parallel.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<Vec<SimulationRecord>> {
    let mut out = Vec::new();
    run_simulation_streaming(cfg, |rec| {
        out.push(rec.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Like [`run_simulation`] but hands each record to `sink` in order as soon
/// as all earlier records are available, so a failure leaves a usable prefix.
pub fn run_simulation_streaming(
    cfg: &SimulationConfig,
    mut sink: impl FnMut(&SimulationRecord) -> Result<()>,
) -> Result<()> {
    check_scenario(cfg.scenario)?;
    if cfg.reps == 0 {
        return Err(Error::validation("reps", "must be at least 1"));
    }
    if cfg.n_list.is_empty() {
        return Err(Error::validation("n_list", "must not be empty"));
    }
    if let Some(m) = &cfg.override_model {
        if cfg.n_list.iter().any(|&n| n != m.base().n()) {
            return Err(Error::validation(
                "n_list",
                format!("an override spec fixes n = {}", m.base().n()),
            ));
        }
    }
    for &n in &cfg.n_list {
        let results: Vec<Result<Vec<SimulationRecord>>> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = replicate_seed(cfg.seed, cfg.scenario, n, rep);
                // B and theta are shared across n so sizes are compared on one model
                let model = match &cfg.override_model {
                    Some(m) => m.clone(),
                    None => scenario_model(cfg.scenario, n, derive_seed(&[cfg.seed, cfg.scenario as u64, rep as u64]))?,
                };
                run_replicate(cfg.scenario, &model, scenario_method(&model), rep, rep_seed, cfg.approx_err)
            })
            .collect();
        for r in results {
            for rec in r? {
                sink(&rec)?;
            }
        }
    }
    Ok(())
}

pub fn write_csv<W: Write>(records: &[SimulationRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// Mean of a field over records matching `(n, method)`.
pub fn mean_by(records: &[SimulationRecord], n: usize, method: SimMethod, field: impl Fn(&SimulationRecord) -> Option<f64>) -> Option<f64> {
    let vals: Vec<f64> = records
        .iter()
        .filter(|r| r.n == n && r.method == method)
        .filter_map(field)
        .collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}
