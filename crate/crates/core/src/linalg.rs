//! Dense complex linear algebra helpers shared across the crate.
//!
//! Everything here targets desk-scale dimensions (d <= 32); the backing
//! store is `nalgebra::DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise max-norm distance. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// ||m - m'||_max, the Hermiticity defect.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// ||u u' - I||_max.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let d = u.nrows();
    max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(d, d))
}

/// Kronecker product a (x) b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn phase_fix_columns(vectors: &mut CMatrix) {
    for mut col in vectors.column_iter_mut() {
        let pivot = col.iter().find(|z| z.norm() > 1e-12).copied();
        if let Some(z) = pivot {
            let phase = z.conj() / z.norm();
            for entry in col.iter_mut() {
                *entry *= phase;
            }
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back sorted descending; each eigenvector's first
/// component above 1e-12 is rotated to be real and positive so that repeated
/// decompositions of the same matrix are reproducible.
pub fn hermitian_eigen(m: &CMatrix, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let asym = hermitian_asymmetry(m);
    if asym > tol {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
            tol,
        });
    }
    // Symmetrize before handing the matrix to the eigensolver so roundoff in
    // the input cannot leak into complex eigenvalue phases.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let d = m.nrows();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    phase_fix_columns(&mut vectors);
    Ok((values, vectors))
}

/// V diag(f(lambda)) V' for a decomposition produced by [`hermitian_eigen`].
pub fn rebuild_from_eigen(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let diag = CVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(f(x), 0.0)));
    vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}
