//! `randclust`: generate synthetic directed networks, co-cluster edge lists,
//! run the simulation scenarios and time the SVD backends.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use randclust_core::randsvd::{iterative_partial_svd, projection_svd, sparsify};
use randclust_core::simulation::{run_simulation_streaming, SimulationConfig, CSV_HEADER};
use randclust_core::{
    co_cluster, Backend, BlockModel, Diagnostics, EdgeListFormat, Error, Method, ModelSpecFile, ProjectionConfig,
    SamplingConfig, SparseDirectedGraph,
};

#[derive(Parser)]
#[command(name = "randclust", version, about = "Randomized spectral co-clustering of directed networks")]
struct Cli {
    /// Worker threads (defaults to one per core). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a network from a JSON model spec.
    Generate(GenerateArgs),
    /// Co-cluster an edge list.
    Cocluster(CoclusterArgs),
    /// Run a simulation scenario and write one CSV row per replicate and method.
    Simulate(SimulateArgs),
    /// Median SVD time of each backend on an edge list.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_edges: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Args)]
struct ReaderArgs {
    /// Edge list, one `src dst` pair per line.
    #[arg(long)]
    edges: PathBuf,
    /// Node count, when it exceeds the largest id in the file.
    #[arg(long)]
    n: Option<usize>,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_based: bool,
}

impl ReaderArgs {
    fn read(&self) -> Result<SparseDirectedGraph, Failure> {
        let file = open(&self.edges)?;
        let format = EdgeListFormat {
            n_hint: self.n,
            one_based: self.one_based,
        };
        Ok(SparseDirectedGraph::from_edge_list_with(BufReader::new(file), format)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Projection,
    Sampling,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Kmeans,
    Kmedian,
}

#[derive(Args)]
struct SvdFlags {
    #[arg(long, default_value_t = ProjectionConfig::DEFAULT_OVERSAMPLE)]
    oversample_r: usize,
    #[arg(long, default_value_t = ProjectionConfig::DEFAULT_OVERSAMPLE)]
    oversample_s: usize,
    #[arg(long, default_value_t = ProjectionConfig::DEFAULT_POWER)]
    power_q: usize,
    #[arg(long, default_value_t = 0.7)]
    sample_p: f64,
    /// Relative tolerance of the iterative solver.
    #[arg(long, default_value_t = SamplingConfig::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = SamplingConfig::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

impl SvdFlags {
    fn backend(&self, which: BackendArg, rank: usize, seed: u64) -> Backend {
        match which {
            BackendArg::Exact => Backend::Exact {
                tol: self.tol,
                max_iter: self.max_iter,
            },
            BackendArg::Projection => Backend::Projection(ProjectionConfig {
                rank,
                oversample_r: self.oversample_r,
                oversample_s: self.oversample_s,
                power_q: self.power_q,
                seed,
            }),
            BackendArg::Sampling => Backend::Sampling(SamplingConfig {
                rank,
                p: self.sample_p,
                seed,
                tol: self.tol,
                max_iter: self.max_iter,
            }),
        }
    }
}

#[derive(Args)]
struct CoclusterArgs {
    #[command(flatten)]
    input: ReaderArgs,
    #[arg(long)]
    ky: usize,
    #[arg(long)]
    kz: usize,
    #[arg(long, value_enum, default_value = "projection")]
    backend: BackendArg,
    #[arg(long, value_enum, default_value = "kmeans")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall times in the diagnostics; output is then not reproducible byte for byte.
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    svd: SvdFlags,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    scenario: u8,
    /// Network sizes; defaults to 300,600,1200, or to the override spec's n.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON model spec replacing the scenario's built-in model.
    #[arg(long)]
    override_spec: Option<PathBuf>,
    /// Skip the dense approximation-error column.
    #[arg(long)]
    no_approx_err: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: ReaderArgs,
    #[arg(long)]
    rank: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,projection,sampling")]
    backends: Vec<BackendArg>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    svd: SvdFlags,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let file: ModelSpecFile =
        serde_json::from_reader(BufReader::new(open(&args.spec)?)).map_err(|e| usage(format!("spec: {e}")))?;
    // sampling does not need rank(B) = Ky, so an all-zero B is accepted here
    let model = file.into_sampling_model()?;
    let (g, labels) = model.generate(args.seed)?;
    let mut edges = create(&args.out_edges)?;
    g.to_edge_list(&mut edges)?;
    edges.flush()?;
    let mut out = create(&args.out_labels)?;
    for (i, (y, z)) in labels.y.iter().zip(&labels.z).enumerate() {
        writeln!(out, "{i}\t{y}\t{z}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CoclusterOutput<'a> {
    row_labels: &'a [usize],
    col_labels: &'a [usize],
    backend: &'static str,
    method: &'static str,
    diagnostics: DiagnosticsOutput<'a>,
}

#[derive(Serialize)]
struct DiagnosticsOutput<'a> {
    n: usize,
    nnz: usize,
    singular_values: &'a [f64],
    svd_converged: bool,
    svd_iterations: usize,
    row_objective: f64,
    col_objective: f64,
    row_zero_rows: usize,
    col_zero_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    svd_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cluster_ms: Option<f64>,
}

fn cocluster(args: &CoclusterArgs) -> Result<(), Failure> {
    let g = args.input.read()?;
    let backend = args.svd.backend(args.backend, args.ky, args.seed);
    let method = match args.method {
        MethodArg::Kmeans => Method::KMeans,
        MethodArg::Kmedian => Method::SphericalKMedian,
    };
    let r = co_cluster(&g, args.ky, args.kz, &backend, method, args.seed)?;
    let d: &Diagnostics = &r.diagnostics;
    let doc = CoclusterOutput {
        row_labels: &r.row_labels,
        col_labels: &r.col_labels,
        backend: r.backend.as_str(),
        method: r.method.as_str(),
        diagnostics: DiagnosticsOutput {
            n: g.n(),
            nnz: g.nnz(),
            singular_values: &d.singular_values,
            svd_converged: d.svd_converged,
            svd_iterations: d.svd_iterations,
            row_objective: d.row_objective,
            col_objective: d.col_objective,
            row_zero_rows: d.row_zero_rows,
            col_zero_rows: d.col_zero_rows,
            svd_ms: args.timings.then_some(d.svd_ms),
            cluster_ms: args.timings.then_some(d.cluster_ms),
        },
    };
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer(&mut out, &doc).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut cfg = SimulationConfig::new(args.scenario, vec![300, 600, 1200], args.reps, args.seed);
    cfg.approx_err = !args.no_approx_err;
    if let Some(path) = &args.override_spec {
        let file: ModelSpecFile =
            serde_json::from_reader(BufReader::new(open(path)?)).map_err(|e| usage(format!("override spec: {e}")))?;
        let model = file.into_model()?;
        cfg.n_list = vec![model.base().n()];
        cfg.override_model = Some(model);
    }
    if let Some(list) = &args.n_list {
        cfg.n_list = list.clone();
    }
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{CSV_HEADER}")?;
    out.flush()?;
    let result = run_simulation_streaming(&cfg, |rec| {
        writeln!(out, "{}", rec.to_csv_row())?;
        out.flush()?;
        Ok(())
    });
    out.flush()?;
    Ok(result?)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let g = args.input.read()?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    for &which in &args.backends {
        match which {
            BackendArg::Exact => {
                let mut times = Vec::with_capacity(args.reps);
                for _ in 0..args.reps {
                    let t = Instant::now();
                    iterative_partial_svd(&g, args.rank, args.svd.tol, args.svd.max_iter)?;
                    times.push(ms_since(t));
                }
                rows.push(("exact".into(), median(times)));
            }
            BackendArg::Projection => {
                let mut times = Vec::with_capacity(args.reps);
                for rep in 0..args.reps {
                    let Backend::Projection(cfg) = args.svd.backend(which, args.rank, args.seed + rep as u64) else {
                        unreachable!()
                    };
                    let t = Instant::now();
                    projection_svd(&g, &cfg)?;
                    times.push(ms_since(t));
                }
                rows.push(("projection".into(), median(times)));
            }
            BackendArg::Sampling => {
                let (mut total, mut svd_only) = (Vec::new(), Vec::new());
                for rep in 0..args.reps {
                    let t = Instant::now();
                    let s = sparsify(&g, args.svd.sample_p, args.seed + rep as u64)?;
                    let t_svd = Instant::now();
                    iterative_partial_svd(&s, args.rank, args.svd.tol, args.svd.max_iter)?;
                    svd_only.push(ms_since(t_svd));
                    total.push(ms_since(t));
                }
                rows.push(("sampling:total".into(), median(total)));
                rows.push(("sampling:svd".into(), median(svd_only)));
            }
        }
    }
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "backend,median_ms,nnz,n,rank")?;
    for (name, ms) in rows {
        writeln!(out, "{name},{ms:.16e},{},{},{}", g.nnz(), g.n(), args.rank)?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
    }
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Cocluster(a) => cocluster(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("randclust: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
