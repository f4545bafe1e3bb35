//! Thin wrappers over nalgebra's symmetric/Hermitian eigensolver.

use nalgebra::{Complex, DMatrix, DVector, Matrix4, SymmetricEigen, Vector4};

pub type C64 = Complex<f64>;

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn min_eigenvalue_herm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue with a unit eigenvector.
pub fn min_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let i = argmin(eig.eigenvalues.iter().copied());
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

pub fn min_eigenpair_herm(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let i = argmin(eig.eigenvalues.iter().copied());
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

/// Sorted eigenvalues and matching eigenvectors of a 4x4 symmetric matrix.
pub fn eigen4(m: &Matrix4<f64>) -> ([f64; 4], [Vector4<f64>; 4]) {
    let eig = SymmetricEigen::new(*m);
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let vecs = idx.map(|i| eig.eigenvectors.column(i).into_owned());
    (vals, vecs)
}

fn argmin(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in it.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}
