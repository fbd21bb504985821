//! Shared fixtures for the criterion benchmarks in `benches/`.

use randclust_core::{generate_scbm, DenseMatrix, ScbmSpec, SparseDirectedGraph};

/// A planted three-cluster graph with average degree about `degree`.
pub fn planted_graph(n: usize, degree: f64, seed: u64) -> SparseDirectedGraph {
    let k = 3;
    let n = n - n % k;
    // diagonal blocks twice as dense; row degree is off * n * (1 + 1/k)
    let off = degree / (n as f64 * (1.0 + 1.0 / k as f64));
    let b = DenseMatrix::from_fn(k, k, |i, j| if i == j { (2.0 * off).min(1.0) } else { off.min(1.0) });
    let spec = ScbmSpec::new(n, b, vec![n / k; k], vec![n / k; k]).expect("valid planted spec");
    generate_scbm(&spec, seed).expect("generation succeeds").0
}
