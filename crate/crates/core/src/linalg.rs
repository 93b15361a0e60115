//! Dense complex matrix helpers shared by the operator modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Frobenius norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||a - b|| / max(||a||, ||b||, 1e-300)` in the Frobenius norm.
pub fn relative_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = fro_norm(&(a - b));
    diff / fro_norm(a).max(fro_norm(b)).max(1e-300)
}

/// `||M - M^H|| <= tol * ||M||`.
pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    let mut diff = 0.0;
    for j in 0..n {
        for i in 0..n {
            diff += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    diff.sqrt() <= tol * fro_norm(m).max(f64::MIN_POSITIVE)
}

/// Symmetrizes `(M + M^H) / 2` to remove rounding asymmetry before eigensolves.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ascending eigenvalues with matching unitary eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn mat_vec(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let x = DVector::from_column_slice(v);
    (m * x).iter().copied().collect()
}

/// Extremal eigenvalues of a Hermitian operator given only its action, via
/// Lanczos with full reorthogonalization. Stops once both Ritz extremes move by
/// less than `tol` relative to the largest one.
pub fn lanczos_extremes<F>(apply: F, n: usize, max_iter: usize, tol: f64) -> (f64, f64)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let norm = |a: &[Complex64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    // deterministic, generic start vector
    let mut q: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64;
            Complex64::new(1.0 + 0.5 * (0.7 * t).sin(), 0.3 * (1.3 * t).cos())
        })
        .collect();
    let s = norm(&q);
    q.iter_mut().for_each(|z| *z /= s);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut prev = (f64::NAN, f64::NAN);
    let steps = max_iter.min(n);

    for k in 0..steps {
        let mut w = apply(&basis[k]);
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let b = norm(&w);

        let m = alpha.len();
        let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let ev = t.symmetric_eigenvalues();
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
        if k > 2 && (lo - prev.0).abs() <= tol * scale && (hi - prev.1).abs() <= tol * scale {
            return (lo, hi);
        }
        prev = (lo, hi);
        if b <= 1e-14 * scale {
            return (lo, hi);
        }
        beta.push(b);
        w.iter_mut().for_each(|z| *z /= b);
        basis.push(w);
    }
    prev
}
