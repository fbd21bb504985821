use rand::Rng;
use rayon::prelude::*;

use crate::dense::{norm, DenseMatrix};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

use super::kmeans::best_of;
use super::{check_input, nearest, seed_centers, squared_distance, ClusterAssignment, ClusterConfig};

/// Rows with Euclidean norm at or below this are treated as zero.
pub const ZERO_ROW_TOL: f64 = 1e-12;

const WEISZFELD_ITERS: usize = 50;
const WEISZFELD_TOL: f64 = 1e-10;
// stream tag for the labels of zero rows, distinct from restart indices
const ZERO_ROW_STREAM: u64 = u64::MAX;

/// k-median on the row-normalized embedding.
///
/// Zero rows have no direction, so they are left out of the fit and given
/// uniformly random labels drawn from `seed`. The remaining rows are scaled to
/// unit length, seeded by distance-weighted sampling, and refined by
/// alternating nearest-center assignment with Weiszfeld updates of each
/// center. The objective is the sum of Euclidean distances over non-zero rows.
pub fn spherical_kmedian(x: &DenseMatrix, k: usize, seed: u64, cfg: &ClusterConfig) -> Result<ClusterAssignment> {
    check_input(x, k)?;
    let (m, d) = x.shape();
    let mut kept = Vec::with_capacity(m);
    let mut unit = Vec::with_capacity(m * d);
    for i in 0..m {
        let row = x.row(i);
        let r = norm(row);
        if r > ZERO_ROW_TOL {
            kept.push(i);
            unit.extend(row.iter().map(|v| v / r));
        }
    }
    if kept.len() < k {
        return Err(Error::validation(
            "embedding",
            format!("only {} non-zero rows for {k} clusters", kept.len()),
        ));
    }
    let xn = DenseMatrix::from_vec(kept.len(), d, unit)?;
    let fit = best_of(
        (0..cfg.restarts.max(1) as u64)
            .into_par_iter()
            .map(|r| single_run(&xn, k, derive_seed(&[seed, r]), cfg.max_iter))
            .collect(),
    );

    let mut labels = vec![0usize; m];
    for (&i, &l) in kept.iter().zip(&fit.labels) {
        labels[i] = l;
    }
    let zero_rows = m - kept.len();
    if zero_rows > 0 {
        let mut rng = stream(seed, ZERO_ROW_STREAM);
        let mut next = kept.iter().copied().peekable();
        for (i, label) in labels.iter_mut().enumerate() {
            if next.peek() == Some(&i) {
                next.next();
            } else {
                *label = rng.gen_range(0..k);
            }
        }
    }
    Ok(ClusterAssignment {
        labels,
        zero_rows,
        ..fit
    })
}

fn objective(x: &DenseMatrix, labels: &[usize], centers: &DenseMatrix) -> f64 {
    (0..x.rows())
        .map(|i| squared_distance(x.row(i), centers.row(labels[i])).sqrt())
        .sum()
}

fn single_run(x: &DenseMatrix, k: usize, seed: u64, max_iter: usize) -> ClusterAssignment {
    let m = x.rows();
    let mut rng = stream(seed, 0);
    let mut centers = seed_centers(x, k, 1.0, &mut rng);
    let mut labels = vec![usize::MAX; m];
    let mut last = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for i in 0..m {
            let (c, _) = nearest(x.row(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let obj = objective(x, &labels, &centers);
        debug_assert!(
            obj <= last + 1e-12 * m as f64,
            "k-median objective increased: {last} -> {obj}"
        );
        last = obj;
        if !changed {
            converged = true;
            break;
        }
        centers = update_centers(x, &mut labels, k, &centers);
    }
    if !converged {
        centers = update_centers(x, &mut labels, k, &centers);
    }
    let objective = objective(x, &labels, &centers);
    ClusterAssignment {
        labels,
        centers,
        objective,
        converged,
        zero_rows: 0,
    }
}

fn update_centers(x: &DenseMatrix, labels: &mut [usize], k: usize, old: &DenseMatrix) -> DenseMatrix {
    let m = x.rows();
    // refill empty groups with the farthest point of a group that can spare one
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
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
        labels[far.expect("m >= k")] = empty;
    }
    let mut centers = old.clone();
    for c in 0..k {
        let members: Vec<&[f64]> = (0..m).filter(|&i| labels[i] == c).map(|i| x.row(i)).collect();
        // a point that was just moved into an empty group starts from itself
        let start = if members.len() == 1 { members[0] } else { old.row(c) };
        let median = geometric_median(&members, start);
        centers.row_mut(c).copy_from_slice(&median);
    }
    centers
}

fn total_distance(points: &[&[f64]], c: &[f64]) -> f64 {
    points.iter().map(|p| squared_distance(p, c).sqrt()).sum()
}

/// Weiszfeld iteration from `start`, accepting only steps that lower the sum
/// of distances.
pub(crate) fn geometric_median(points: &[&[f64]], start: &[f64]) -> Vec<f64> {
    let d = start.len();
    let mut c = start.to_vec();
    let mut f = total_distance(points, &c);
    for _ in 0..WEISZFELD_ITERS {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        for p in points {
            let dist = squared_distance(p, &c).sqrt();
            if dist < 1e-15 {
                continue;
            }
            let w = 1.0 / dist;
            for (s, v) in num.iter_mut().zip(p.iter()) {
                *s += w * v;
            }
            den += w;
        }
        if den == 0.0 {
            break;
        }
        let next: Vec<f64> = num.iter().map(|s| s / den).collect();
        let f_next = total_distance(points, &next);
        if f_next > f {
            break;
        }
        let step = squared_distance(&next, &c).sqrt();
        c = next;
        f = f_next;
        if step < WEISZFELD_TOL {
            break;
        }
    }
    c
}
