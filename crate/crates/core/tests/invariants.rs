//! Property tests over randomly drawn models, graphs and embeddings.

use proptest::prelude::*;
use rand::Rng;

use randclust_core::linalg::orthonormality_defect;
use randclust_core::rng::{stream, Gaussian};
use randclust_core::{
    approximation_error, co_cluster, generate_scbm, iterative_partial_svd, lloyd_kmeans, misclustering_rate,
    population_graph, population_matrix, population_structure, projection_svd, sampling_svd, sparsify, Backend,
    ClusterConfig, DcScbmSpec, DenseMatrix, Method, ProjectionConfig, SamplingConfig, ScbmSpec, SparseDirectedGraph,
};

fn sizes<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut s = vec![3; k];
    for _ in 0..n - 3 * k {
        s[rng.gen_range(0..k)] += 1;
    }
    s
}

fn scbm(seed: u64, max_n: usize) -> ScbmSpec {
    let mut rng = stream(seed, 0);
    loop {
        let ky = rng.gen_range(1..=3);
        let kz = rng.gen_range(ky..=4);
        let n = rng.gen_range(20..=max_n);
        let b = DenseMatrix::from_fn(ky, kz, |_, _| rng.gen_range(0.05..1.0));
        let (r, c) = (sizes(&mut rng, n, ky), sizes(&mut rng, n, kz));
        if let Ok(s) = ScbmSpec::new(n, b, r, c) {
            return s;
        }
    }
}

fn labels(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().enumerate().flat_map(|(k, &s)| std::iter::repeat_n(k, s)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn low_rank_graph(seed: u64, n: usize, k: usize) -> (SparseDirectedGraph, DenseMatrix) {
    let mut rng = stream(seed, 1);
    let w = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(0.0..1.0));
    let h = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(0.0..1.0));
    let a = w.matmul(&h.transpose()).unwrap();
    (SparseDirectedGraph::from_dense(&a).unwrap(), a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn population_left_vectors_are_scaled_indicators(seed in any::<u64>()) {
        let spec = scbm(seed, 150);
        let s = population_structure(&spec).unwrap();
        let y = labels(spec.row_sizes());
        let z = labels(spec.col_sizes());
        for i in 0..spec.n() {
            for j in 0..spec.n() {
                let du = dist(s.u_bar.row(i), s.u_bar.row(j));
                if y[i] == y[j] {
                    prop_assert!(du < 1e-8);
                } else {
                    let want = (1.0 / spec.row_sizes()[y[i]] as f64 + 1.0 / spec.row_sizes()[y[j]] as f64).sqrt();
                    prop_assert!((du - want).abs() < 1e-8);
                }
                let dv = dist(s.v_bar.row(i), s.v_bar.row(j));
                if z[i] == z[j] {
                    prop_assert!(dv < 1e-8);
                } else {
                    prop_assert!(dv >= s.delta - 1e-8);
                }
            }
        }
    }

    #[test]
    fn degree_corrected_rows_are_orthogonal_across_clusters(seed in any::<u64>()) {
        let base = scbm(seed, 120);
        let mut rng = stream(seed, 2);
        let n = base.n();
        let ty: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let tz: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let spec = DcScbmSpec::normalized(base, ty, tz).unwrap();
        let s = population_structure(&spec).unwrap();
        let y = labels(spec.base().row_sizes());
        let z = labels(spec.base().col_sizes());
        let cos = |a: &[f64], b: &[f64]| {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            d / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
        };
        for i in 0..n {
            for j in 0..n {
                let c = cos(s.u_bar.row(i), s.u_bar.row(j));
                if y[i] == y[j] {
                    // same cluster: collinear with a positive scale
                    prop_assert!((c - 1.0).abs() < 1e-8);
                } else {
                    prop_assert!(c.abs() < 1e-8);
                }
                if z[i] != z[j] {
                    let want = cos(s.col_directions.row(z[i]), s.col_directions.row(z[j]));
                    prop_assert!((cos(s.v_bar.row(i), s.v_bar.row(j)) - want).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn backends_return_orthonormal_factors(seed in any::<u64>()) {
        let spec = scbm(seed, 200);
        let (g, _) = generate_scbm(&spec, seed).unwrap();
        let k = spec.ky();
        for f in [
            iterative_partial_svd(&g, k, 1e-8, 1000).unwrap(),
            projection_svd(&g, &ProjectionConfig::new(k, seed)).unwrap(),
            sampling_svd(&g, &SamplingConfig::new(k, 0.7, seed)).unwrap(),
        ] {
            prop_assert!(orthonormality_defect(&f.u) <= 1e-8);
            prop_assert!(orthonormality_defect(&f.v) <= 1e-8);
            prop_assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn projection_is_exact_on_low_rank_input(seed in any::<u64>(), n in 10usize..80, k in 1usize..5, q in 0usize..4) {
        let (g, a) = low_rank_graph(seed, n, k);
        let mut cfg = ProjectionConfig::new(k, seed);
        cfg.power_q = q;
        let f = projection_svd(&g, &cfg).unwrap();
        prop_assert!(f.reconstruct().unwrap().sub(&a).unwrap().frobenius_norm() <= 1e-8);
    }

    #[test]
    fn sparsify_keeps_support(seed in any::<u64>(), p in 0.05f64..1.0) {
        let spec = scbm(seed, 120);
        let (g, _) = generate_scbm(&spec, seed).unwrap();
        let s = sparsify(&g, p, seed).unwrap();
        for (i, j, v) in s.entries() {
            prop_assert!(g.get(i, j) > 0.0);
            prop_assert!((v - g.get(i, j) / p).abs() <= 1e-12 * v);
        }
    }

    #[test]
    fn backends_are_deterministic_across_pools(seed in any::<u64>()) {
        let spec = scbm(seed, 150);
        let (g, _) = generate_scbm(&spec, seed).unwrap();
        let k = spec.ky();
        let run = || (
            projection_svd(&g, &ProjectionConfig::new(k, seed)).unwrap(),
            sampling_svd(&g, &SamplingConfig::new(k, 0.5, seed)).unwrap(),
        );
        let wide = run();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        prop_assert_eq!(wide, single);
    }

    #[test]
    fn misclustering_ignores_label_names(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = stream(seed, 3);
        let n = rng.gen_range(1..80);
        let est: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let shift = rng.gen_range(0..k);
        let renamed: Vec<usize> = est.iter().map(|l| (l + shift) % k).collect();
        prop_assert_eq!(misclustering_rate(&est, &truth, k).unwrap(), misclustering_rate(&renamed, &truth, k).unwrap());
    }

    #[test]
    fn kmeans_objective_survives_rotation(seed in any::<u64>(), angle in 0.0f64..std::f64::consts::TAU) {
        let mut g = Gaussian::new(stream(seed, 4));
        let x = DenseMatrix::from_fn(40, 2, |i, _| (i % 3) as f64 * 4.0 + 0.5 * g.sample());
        let rot = DenseMatrix::from_rows(&[vec![angle.cos(), -angle.sin()], vec![angle.sin(), angle.cos()]]).unwrap();
        let a = lloyd_kmeans(&x, 3, seed, &ClusterConfig::default()).unwrap();
        let b = lloyd_kmeans(&x.matmul(&rot).unwrap(), 3, seed, &ClusterConfig::default()).unwrap();
        prop_assert!((a.objective - b.objective).abs() <= 1e-9 * a.objective.max(1.0));
    }

    #[test]
    fn population_graphs_are_recovered_exactly(seed in any::<u64>()) {
        let spec = scbm(seed, 300);
        let g = population_graph(&spec).unwrap();
        let (y, z) = (labels(spec.row_sizes()), labels(spec.col_sizes()));
        let mut methods = vec![Method::KMeans];
        // with a single singular vector every normalized row is the same point,
        // so spherical k-median can only recover column clusters when Ky > 1
        if spec.ky() > 1 || spec.kz() == 1 {
            methods.push(Method::SphericalKMedian);
        }
        for m in methods {
            let r = co_cluster(&g, spec.ky(), spec.kz(), &Backend::exact(), m, seed).unwrap();
            prop_assert!(r.diagnostics.row_objective < 1e-10 && r.diagnostics.col_objective < 1e-10);
            prop_assert_eq!(misclustering_rate(&r.row_labels, &y, spec.ky()).unwrap(), 0.0);
            prop_assert_eq!(misclustering_rate(&r.col_labels, &z, spec.kz()).unwrap(), 0.0);
        }
    }
}

#[test]
fn more_power_steps_do_not_hurt() {
    let spec = ScbmSpec::four_parameter(300, 3, 0.2, 0.5).unwrap();
    let p = population_matrix(&spec).unwrap();
    let (mut q0, mut q2) = (0.0, 0.0);
    for seed in 0..20 {
        let (g, _) = generate_scbm(&spec, seed).unwrap();
        let mut cfg = ProjectionConfig::new(3, seed);
        cfg.power_q = 0;
        q0 += approximation_error(&projection_svd(&g, &cfg).unwrap(), &p).unwrap();
        cfg.power_q = 2;
        q2 += approximation_error(&projection_svd(&g, &cfg).unwrap(), &p).unwrap();
    }
    assert!(q2 / 20.0 <= q0 / 20.0 + 1e-9, "q=2 {} vs q=0 {}", q2 / 20.0, q0 / 20.0);
}

#[test]
fn generated_mean_matches_population() {
    let b = DenseMatrix::from_rows(&[vec![0.6, 0.1], vec![0.2, 0.4]]).unwrap();
    let spec = ScbmSpec::new(12, b, vec![5, 7], vec![6, 6]).unwrap();
    let p = population_matrix(&spec).unwrap();
    let reps = 500;
    let mut sum = DenseMatrix::zeros(12, 12);
    for seed in 0..reps {
        let (g, _) = generate_scbm(&spec, seed).unwrap();
        for (i, j, v) in g.entries() {
            sum[(i, j)] += v;
        }
    }
    for i in 0..12 {
        assert_eq!(sum[(i, i)], 0.0);
        for j in 0..12 {
            if i != j {
                let pij = p[(i, j)];
                let band = 4.0 * (pij * (1.0 - pij) / reps as f64).sqrt();
                assert!((sum[(i, j)] / reps as f64 - pij).abs() <= band, "({i},{j})");
            }
        }
    }
}

#[test]
fn observed_graph_error_follows_the_rate() {
    let spec = ScbmSpec::four_parameter(300, 3, 0.2, 0.5).unwrap();
    let p = population_matrix(&spec).unwrap();
    let bound = 3.0 * (300.0f64 * 0.2).sqrt();
    let (mut full, mut sampled) = (0.0, 0.0);
    for seed in 0..20 {
        let (g, _) = generate_scbm(&spec, seed).unwrap();
        let e = approximation_error(&g, &p).unwrap();
        assert!(e <= bound, "replicate {seed}: {e} > {bound}");
        full += e;
        sampled += approximation_error(&sparsify(&g, 0.7, seed).unwrap(), &p).unwrap();
    }
    assert!(sampled >= full);
}
