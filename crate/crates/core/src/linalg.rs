//! Dense factorizations backed by faer.

use std::sync::Once;

use crate::dense::DenseMatrix;

// faer's blocked kernels run sequentially so results do not depend on the
// rayon pool size.
fn sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Thin Householder QR of a tall matrix: `m = q * r` with `q` having
/// orthonormal columns. Rank-deficient inputs still yield an orthonormal `q`.
pub(crate) fn thin_qr(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    assert!(m.rows() >= m.cols(), "thin QR needs rows >= cols");
    sequential();
    let qr = m.to_faer().qr();
    (
        DenseMatrix::from_faer(qr.compute_thin_Q().as_ref()),
        DenseMatrix::from_faer(qr.thin_R()),
    )
}

/// Numerical rank from the diagonal of an R factor.
pub(crate) fn r_rank(r: &DenseMatrix, rel_tol: f64) -> usize {
    let k = r.rows().min(r.cols());
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let top = diag.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > rel_tol * top).count()
}

/// Thin SVD `m = u diag(s) v^T` with singular values sorted non-increasing.
pub(crate) fn svd(m: &DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (DenseMatrix::zeros(rows, 0), Vec::new(), DenseMatrix::zeros(cols, 0));
    }
    sequential();
    let svd = m.to_faer().thin_svd().expect("dense SVD did not converge");
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let (u, v) = (svd.U(), svd.V());
    (
        DenseMatrix::from_fn(rows, k, |i, j| u[(i, order[j])]),
        order.iter().map(|&j| s[j]).collect(),
        DenseMatrix::from_fn(cols, k, |i, j| v[(i, order[j])]),
    )
}

/// Singular values only, non-increasing.
pub(crate) fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    sequential();
    let mut s = m.to_faer().singular_values().expect("dense SVD did not converge");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Flip each singular pair so the largest-magnitude entry of the `u`
/// column is positive (first such entry on ties).
pub(crate) fn normalize_signs(u: &mut DenseMatrix, v: &mut DenseMatrix) {
    for j in 0..u.cols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..u.rows() {
            let x = u[(i, j)];
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
            for i in 0..v.rows() {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
}

/// Cosines of the principal angles between the column spans of two
/// matrices with orthonormal columns, non-increasing.
pub fn principal_cosines(a: &DenseMatrix, b: &DenseMatrix) -> Vec<f64> {
    let cross = a.transpose_matmul(b).expect("row counts match");
    singular_values(&cross)
        .into_iter()
        .map(|c| c.min(1.0))
        .collect()
}

/// Largest principal angle (radians) between two orthonormal column spans
/// of equal dimension, from the residual `b - a a^T b` (accurate near zero).
pub fn max_principal_angle(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let coeffs = a.transpose_matmul(b).expect("row counts match");
    let projected = a.matmul(&coeffs).expect("inner dims match");
    let residual = b.sub(&projected).expect("same shape");
    let sin = singular_values(&residual).first().cloned().unwrap_or(0.0);
    sin.min(1.0).asin()
}

/// `max |M^T M - I|` entrywise.
pub fn orthonormality_defect(m: &DenseMatrix) -> f64 {
    let gram = m.transpose_matmul(m).expect("square gram");
    gram.max_abs_diff(&DenseMatrix::identity(m.cols()))
}
