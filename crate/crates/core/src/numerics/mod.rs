//! Dense linear algebra kernel.
//!
//! Matrices are plain `nalgebra::DMatrix<f64>`; factorizations that are not
//! specific to this crate (LU, Cholesky, SVD, symmetric eigen) come from
//! nalgebra. The Riccati iteration, the nonsymmetric eigenvalue solver used for
//! spectral radii, the equality-constrained least squares and the discrete
//! Lyapunov solver live here.

mod eigen;
mod lsq;
mod lyapunov;
mod riccati;

pub use eigen::{eigenvalues, spectral_radius};
pub use lsq::{lsq_equality, LsqSolution};
pub use lyapunov::solve_discrete_lyapunov;
pub use riccati::{
    dare_residual, riccati_gain, solve_dare, solve_dare_with, solve_filter_dare, solve_filter_dare_with,
    DareOptions, RiccatiSolution,
};

use crate::error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

/// Gains below this magnitude are structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-12;

/// Tolerance used for symmetry and semidefiniteness checks on weights and
/// covariances, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub(crate) fn ensure_finite(m: &Matrix, name: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::input(format!("{name} has non-finite entries")))
    }
}

pub(crate) fn ensure_square(m: &Matrix, name: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::dim(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub(crate) fn ensure_shape(m: &Matrix, rows: usize, cols: usize, name: &str) -> Result<()> {
    if m.shape() == (rows, cols) {
        Ok(())
    } else {
        Err(Error::dim(format!(
            "{name} must be {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn is_symmetric(m: &Matrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let tol = SYMMETRY_TOL * max_abs(m).max(1.0);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    nalgebra::SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn is_psd(m: &Matrix) -> bool {
    is_symmetric(m) && min_eigenvalue(m) >= -SYMMETRY_TOL * max_abs(m).max(1.0)
}

pub fn is_pd(m: &Matrix) -> bool {
    is_symmetric(m) && nalgebra::Cholesky::new(symmetrize(m)).is_some()
}

/// Matrix rank from singular values, with the usual `max(r, c) * eps * s_max` cutoff.
pub fn rank(m: &Matrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// Observability matrix `[C; CA; ...; CA^(n-1)]`.
pub fn observability_matrix(a: &Matrix, c: &Matrix) -> Matrix {
    let n = a.nrows();
    let p = c.nrows();
    let mut out = Matrix::zeros(n * p, n);
    let mut row = c.clone();
    for k in 0..n {
        out.view_mut((k * p, 0), (p, n)).copy_from(&row);
        row = &row * a;
    }
    out
}

pub fn is_observable(a: &Matrix, c: &Matrix) -> bool {
    rank(&observability_matrix(a, c)) == a.nrows()
}

/// Symmetric square root of a PSD matrix, clipping tiny negative eigenvalues.
pub fn psd_sqrt(m: &Matrix) -> Matrix {
    if m.nrows() == 0 {
        return m.clone();
    }
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * Matrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
