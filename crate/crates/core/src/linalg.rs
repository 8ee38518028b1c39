//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Largest singular value of a Hermitian matrix (= max |eigenvalue|).
pub fn hermitian_operator_norm(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Trace norm of a Hermitian matrix (= sum of |eigenvalues|).
pub fn hermitian_trace_norm(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Operator norm of a general complex matrix via its Gram matrix.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    let gram = m.adjoint() * m;
    hermitian_eigenvalues(&gram).iter().fold(0.0f64, |acc, v| acc.max(v.max(0.0))).sqrt()
}

/// Eigendecomposition of a real symmetric matrix: `(eigenvalues, eigenvectors)`
/// with eigenvectors as columns.
pub fn symmetric_eigen(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}
