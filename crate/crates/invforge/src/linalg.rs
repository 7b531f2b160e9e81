//! Dense complex matrix helpers shared by the rest of the crate.
//!
//! Everything here works on `ndarray::Array2<Complex64>`; the eigensolvers
//! are bridged to `faer`. Matrices in this crate are small (dimension at
//! most 16, superoperators at most 256), so dense storage throughout.

use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64;
use std::sync::Once;

use crate::error::{Error, Result};

pub type CMat = Array2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

static FAER_SEQ: Once = Once::new();

// Pin faer to sequential execution so that eigenvalue output is bitwise
// reproducible run to run.
fn faer_seq() {
    FAER_SEQ.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

pub fn identity(n: usize) -> CMat {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { ONE } else { ZERO })
}

pub fn zeros(n: usize) -> CMat {
    Array2::from_elem((n, n), ZERO)
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

/// Hilbert-Schmidt inner product Tr(A'B).
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    max_abs_diff(a, &dagger(a)) <= tol
}

/// Kronecker product with the left factor on the high-order index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    Array2::from_shape_fn((ra * rb, ca * cb), |(i, j)| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Column-stacking vectorization: vec(O)[i + n*j] = O[i, j].
pub fn vec_mat(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    let mut v = vec![ZERO; n * n];
    for j in 0..n {
        for i in 0..n {
            v[i + n * j] = a[(i, j)];
        }
    }
    v
}

pub fn unvec(v: &[Complex64], n: usize) -> CMat {
    Array2::from_shape_fn((n, n), |(i, j)| v[i + n * j])
}

fn to_faer(a: &CMat) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    faer_seq();
    to_faer(a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Full eigendecomposition of a general complex matrix.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
pub fn eigendecompose(a: &CMat) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    faer_seq();
    let eig = to_faer(a)
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let n = a.nrows();
    let values: Vec<Complex64> = (0..n).map(|k| eig.S()[k]).collect();
    let vectors: Vec<Vec<Complex64>> = (0..n)
        .map(|c| (0..n).map(|r| eig.U()[(r, c)]).collect())
        .collect();
    Ok((values, vectors))
}

/// Modified Gram-Schmidt on complex vectors. Returns an orthonormal basis
/// of the span, dropping vectors whose residual norm falls below `tol`.
pub fn orthonormalize(vectors: &[Vec<Complex64>], tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    basis
}

/// Fix the global phase so that the first entry with magnitude above
/// `threshold * max|entry|` becomes real positive, then normalize to unit
/// Hilbert-Schmidt norm. Row-major scan for a matrix reshaped from `v`.
pub fn canonical_phase_matrix(m: &CMat) -> CMat {
    let peak = max_abs(m);
    if peak == 0.0 {
        return m.clone();
    }
    let mut phase = ONE;
    'outer: for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > 1e-9 * peak {
                phase = z.conj() / z.norm();
                break 'outer;
            }
        }
    }
    let norm = hs_norm(m);
    m.mapv(|z| z * phase / norm)
}
