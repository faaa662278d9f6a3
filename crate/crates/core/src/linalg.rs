//! Small dense-matrix helpers shared by the analysis modules.

use alloc::vec::Vec;
use libm::sqrt;
use nalgebra::{DMatrix, DVector};

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// Extends the orthonormal columns of `basis` (m×k) to an m×m orthonormal
/// matrix. Each new column is the standard basis vector with the largest
/// residual after projecting out the current columns (twice, for stability).
pub fn complete_orthonormal(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let m = basis.nrows();
    let mut cols: Vec<DVector<f64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    if m == 0 {
        return DMatrix::zeros(0, 0);
    }
    while cols.len() < m {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = -1.0;
        for i in 0..m {
            let mut v = DVector::zeros(m);
            v[i] = 1.0;
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&v);
                    v.axpy(-proj, c, 1.0);
                }
            }
            let norm = v.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(v);
            }
        }
        let v = best.expect("m > 0");
        cols.push(v / best_norm);
    }
    DMatrix::from_columns(&cols)
}

/// Ratio of largest to smallest singular value; infinite when singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 1.0;
    }
    let (_, sv, _) = jacobi_svd(m);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Full SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Returns `(U, σ, V)` with `U` m×m, `V` n×n, and the `min(m, n)` singular
/// values in descending order, so that `A = U Σ Vᵀ`. Left singular vectors
/// of negligible singular values come from basis completion.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    if m < n {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    // m >= n from here on: orthogonalise the columns of W = A V
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + sqrt(1.0 + zeta * zeta));
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|i| w.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let v_sorted = DMatrix::from_columns(&order.iter().map(|&i| v.column(i).into_owned()).collect::<Vec<_>>());

    let cutoff = sigma.first().copied().unwrap_or(0.0) * f64::EPSILON * (m.max(n) as f64);
    let u_cols: Vec<DVector<f64>> = order
        .iter()
        .zip(&sigma)
        .take_while(|(_, &s)| s > cutoff && s > 0.0)
        .map(|(&i, &s)| w.column(i) / s)
        .collect();
    let u = complete_orthonormal(&DMatrix::from_columns_or_empty(m, &u_cols));
    (u, sigma, v_sorted)
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = c * x - s * y;
        m[(r, q)] = s * x + c * y;
    }
}

trait FromColumnsOrEmpty {
    fn from_columns_or_empty(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64>;
}

impl FromColumnsOrEmpty for DMatrix<f64> {
    fn from_columns_or_empty(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
        if cols.is_empty() {
            DMatrix::zeros(rows, 0)
        } else {
            DMatrix::from_columns(cols)
        }
    }
}
