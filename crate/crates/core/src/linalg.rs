//! Dense per-fiber matrix helpers shared across the crate.

use nalgebra::DMatrix;

use crate::C64;

/// Largest singular value.
pub(crate) fn op_norm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Schatten p-norm from the singular values.
pub(crate) fn schatten_norm(m: &DMatrix<C64>, p: f64) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

pub(crate) fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Max-modulus entry; cheap deviation measure.
pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues of a Hermitian matrix sorted in decreasing order, with the
/// matching eigenvector columns.
pub(crate) fn hermitian_eigen_sorted(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    // decreasing eigenvalues, ties broken by original index
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Apply a scalar function to a Hermitian matrix through its eigendecomposition.
pub(crate) fn hermitian_calculus(
    m: &DMatrix<C64>,
    f: impl Fn(f64) -> C64,
) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen_sorted(m);
    let diag = DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| f(l)),
    ));
    &vectors * diag * vectors.adjoint()
}

/// General complex eigenvalues; falls back to `None` when the QR iteration
/// fails to settle, which callers must handle.
pub(crate) fn eigenvalues(m: &DMatrix<C64>) -> Option<Vec<C64>> {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|e| e.iter().copied().collect())
}

/// Force exact Hermitian symmetry after a functional-calculus round trip.
pub(crate) fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}
