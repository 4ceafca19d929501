//! Small dense helpers on complex matrices.

use crate::{CMatrix, C64};

/// Rank-one product `x y*`.
pub fn outer(x: &[C64], y: &[C64]) -> CMatrix {
    CMatrix::from_fn(x.len(), y.len(), |r, c| x[r] * y[c].conj())
}

/// Accumulate `scale * x x*` into `acc`.
pub fn add_outer(acc: &mut CMatrix, x: &[C64], scale: f64) {
    let n = x.len();
    for c in 0..n {
        let yc = x[c].conj() * scale;
        for r in 0..n {
            acc[(r, c)] += x[r] * yc;
        }
    }
}

/// Largest entrywise `|A - A*|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// Spectral (operator 2-) norm.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |m, &v| m.max(v))
}

/// Largest entrywise `|a - b|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// True when `a` is Hermitian and positive semidefinite within the relative
/// tolerances `herm_tol * (1 + ||a||_F)` and `psd_tol * (1 + ||a||_F)`.
pub fn is_hermitian_psd(a: &CMatrix, herm_tol: f64, psd_tol: f64) -> bool {
    let scale = 1.0 + frobenius_norm(a);
    hermitian_defect(a) <= herm_tol * scale && min_eigenvalue(a) >= -psd_tol * scale
}
