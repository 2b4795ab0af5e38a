use super::{ensure_finite, ensure_shape, ensure_square, symmetrize, Matrix, Vector};
use crate::error::{Error, Result};

/// Solve `X = A X A' + Q` by the Kronecker form `(I - A (x) A) vec X = vec Q`.
/// Intended for the small closed loops in this crate (n up to a few dozen).
pub fn solve_discrete_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    ensure_square(a, "A")?;
    let n = a.nrows();
    ensure_shape(q, n, n, "Q")?;
    ensure_finite(a, "A")?;
    ensure_finite(q, "Q")?;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let kron = a.kronecker(a);
    let lhs = Matrix::identity(n * n, n * n) - kron;
    let rhs = Vector::from_column_slice(q.as_slice());
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::input("A has reciprocal eigenvalue pairs; Lyapunov equation is singular"))?;
    Ok(symmetrize(&Matrix::from_column_slice(n, n, x.as_slice())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar() {
        let x = solve_discrete_lyapunov(&Matrix::from_element(1, 1, 0.5), &Matrix::from_element(1, 1, 1.0)).unwrap();
        assert!((x[(0, 0)] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn satisfies_equation() {
        let a = Matrix::from_row_slice(3, 3, &[0.5, 0.2, 0.0, -0.1, 0.3, 0.4, 0.0, 0.1, -0.6]);
        let q = Matrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.1, 0.0, 0.1, 1.0]);
        let x = solve_discrete_lyapunov(&a, &q).unwrap();
        let defect = &a * &x * a.transpose() + &q - &x;
        assert!(defect.amax() < 1e-12);
    }
}
