use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::Result;
use crate::rng::{derive_seed, stream};

use super::{check_input, nearest, seed_centers, squared_distance, ClusterAssignment, ClusterConfig};

/// Lloyd's algorithm with k-means++ seeding, keeping the best of
/// `cfg.restarts` independent runs.
///
/// An empty cluster is refilled with the point farthest from its current
/// center. Restarts use seeds derived from `(seed, restart)`, so the result
/// does not depend on how they are scheduled.
pub fn lloyd_kmeans(x: &DenseMatrix, k: usize, seed: u64, cfg: &ClusterConfig) -> Result<ClusterAssignment> {
    check_input(x, k)?;
    let runs: Vec<ClusterAssignment> = (0..cfg.restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| single_run(x, k, derive_seed(&[seed, r]), cfg.max_iter))
        .collect();
    Ok(best_of(runs))
}

pub(super) fn best_of(runs: Vec<ClusterAssignment>) -> ClusterAssignment {
    runs.into_iter()
        .reduce(|best, run| if run.objective < best.objective { run } else { best })
        .expect("at least one restart")
}

fn single_run(x: &DenseMatrix, k: usize, seed: u64, max_iter: usize) -> ClusterAssignment {
    let m = x.rows();
    let mut rng = stream(seed, 0);
    let mut centers = seed_centers(x, k, 2.0, &mut rng);
    let mut labels = vec![usize::MAX; m];
    let mut last_objective = f64::INFINITY;
    // rounding slack for the monotonicity check, relative to the data's energy
    let slack = 1e-12 * x.as_slice().iter().map(|v| v * v).sum::<f64>();
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        let mut objective = 0.0;
        for i in 0..m {
            let (c, dist) = nearest(x.row(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            objective += dist;
        }
        debug_assert!(
            objective <= last_objective + slack,
            "k-means objective increased: {last_objective} -> {objective}"
        );
        last_objective = objective;
        if !changed {
            converged = true;
            break;
        }
        centers = update_centers(x, &mut labels, k, &centers);
    }
    if !converged {
        centers = update_centers(x, &mut labels, k, &centers);
    }
    let objective = (0..m)
        .map(|i| squared_distance(x.row(i), centers.row(labels[i])))
        .sum();
    ClusterAssignment {
        labels,
        centers,
        objective,
        converged,
        zero_rows: 0,
    }
}

/// Means of the current groups; empty groups take the point farthest from
/// its assigned center.
fn update_centers(x: &DenseMatrix, labels: &mut [usize], k: usize, old: &DenseMatrix) -> DenseMatrix {
    let (m, d) = x.shape();
    loop {
        let mut sums = DenseMatrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..m {
            counts[labels[i]] += 1;
            for (s, &v) in sums.row_mut(labels[i]).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            for c in 0..k {
                let inv = 1.0 / counts[c] as f64;
                sums.row_mut(c).iter_mut().for_each(|s| *s *= inv);
            }
            return sums;
        };
        // farthest point among clusters that can spare one
        let mut far = None;
        let mut far_dist = -1.0;
        for i in 0..m {
            if counts[labels[i]] < 2 {
                continue;
            }
            let dist = squared_distance(x.row(i), old.row(labels[i]));
            if dist > far_dist {
                far_dist = dist;
                far = Some(i);
            }
        }
        let i = far.expect("m >= k guarantees a cluster with two members");
        labels[i] = empty;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Gaussian;

    #[test]
    fn repeated_rows_are_grouped_exactly() {
        let protos = [[0.0, 1.0], [5.0, 5.0], [-3.0, 2.0]];
        let x = DenseMatrix::from_fn(30, 2, |i, j| protos[i % 3][j]);
        let a = lloyd_kmeans(&x, 3, 1, &ClusterConfig::default()).unwrap();
        assert_eq!(a.objective, 0.0);
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(a.labels[i] == a.labels[j], i % 3 == j % 3);
            }
        }
    }

    #[test]
    fn single_cluster_center_is_mean() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]]).unwrap();
        let a = lloyd_kmeans(&x, 1, 0, &ClusterConfig::default()).unwrap();
        assert!((a.centers[(0, 0)] - 3.0).abs() < 1e-15);
        assert!((a.centers[(0, 1)] - 3.0).abs() < 1e-15);
        assert_eq!(a.labels, vec![0, 0, 0]);
    }

    fn brute_force_best(x: &DenseMatrix, k: usize) -> f64 {
        let m = x.rows();
        let mut labels = vec![0usize; m];
        let mut best = f64::INFINITY;
        loop {
            let mut cost = 0.0;
            let mut ok = true;
            for c in 0..k {
                let members: Vec<usize> = (0..m).filter(|&i| labels[i] == c).collect();
                if members.is_empty() {
                    ok = false;
                    break;
                }
                for dim in 0..x.cols() {
                    let mean = members.iter().map(|&i| x[(i, dim)]).sum::<f64>() / members.len() as f64;
                    cost += members.iter().map(|&i| (x[(i, dim)] - mean).powi(2)).sum::<f64>();
                }
            }
            if ok {
                best = best.min(cost);
            }
            // odometer over k^m labelings
            let mut pos = 0;
            loop {
                if pos == m {
                    return best;
                }
                labels[pos] += 1;
                if labels[pos] < k {
                    break;
                }
                labels[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn planted_wells_match_brute_force() {
        let mut g = Gaussian::new(stream(21, 0));
        let wells = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let x = DenseMatrix::from_fn(12, 2, |i, j| wells[i % 3][j] + g.sample());
        let oracle = brute_force_best(&x, 3);
        let a = lloyd_kmeans(&x, 3, 4, &ClusterConfig::default()).unwrap();
        assert!((a.objective - oracle).abs() <= 1e-9 * oracle.max(1.0), "{} vs {oracle}", a.objective);
    }

    #[test]
    fn rotation_leaves_objective_unchanged() {
        let mut g = Gaussian::new(stream(5, 0));
        let x = DenseMatrix::from_fn(60, 2, |i, _| (i % 4) as f64 * 3.0 + 0.3 * g.sample());
        let (c, s) = (0.6f64, 0.8f64);
        let rot = DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let xr = x.matmul(&rot).unwrap();
        let a = lloyd_kmeans(&x, 4, 9, &ClusterConfig::default()).unwrap();
        let b = lloyd_kmeans(&xr, 4, 9, &ClusterConfig::default()).unwrap();
        assert!((a.objective - b.objective).abs() <= 1e-9 * a.objective.max(1.0));
    }

    #[test]
    fn too_few_rows() {
        let x = DenseMatrix::zeros(2, 3);
        assert!(lloyd_kmeans(&x, 3, 0, &ClusterConfig::default()).is_err());
    }

    #[test]
    fn duplicate_heavy_input_keeps_every_cluster() {
        // only two distinct points but three clusters requested
        let x = DenseMatrix::from_fn(9, 1, |i, _| if i < 8 { 0.0 } else { 1.0 });
        let a = lloyd_kmeans(&x, 3, 2, &ClusterConfig::default()).unwrap();
        let mut seen = a.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 3);
        assert_eq!(a.objective, 0.0);
    }
}
