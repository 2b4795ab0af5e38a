use super::{
    ensure_finite, ensure_shape, ensure_square, is_symmetric, max_abs, min_eigenvalue,
    spectral_radius, symmetrize, Matrix, SYMMETRY_TOL,
};
use crate::error::{Error, Result};

/// Stabilizing solution of a discrete algebraic Riccati equation.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub p: Matrix,
    pub gain: Matrix,
    /// Max-abs entry of `Ric(P) - P`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DareOptions {
    /// Convergence when the residual drops below `tol * max(1, max|P|)`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for DareOptions {
    fn default() -> Self {
        DareOptions {
            tol: 1e-12,
            max_iterations: 1_000_000,
        }
    }
}

/// One application of the Riccati map
/// `P -> A'PA - A'PB (R + B'PB)^-1 B'PA + Q`, returning the new iterate and
/// the gain `(R + B'PB)^-1 B'PA` evaluated at the input.
fn riccati_step(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<(Matrix, Matrix)> {
    let pa = p * a;
    let btpa = b.transpose() * &pa;
    let s = r + b.transpose() * p * b;
    let gain = match nalgebra::Cholesky::new(symmetrize(&s)) {
        Some(ch) => ch.solve(&btpa),
        None => s
            .clone()
            .lu()
            .solve(&btpa)
            .ok_or_else(|| Error::input("R + B'PB is singular"))?,
    };
    let next = a.transpose() * &pa - btpa.transpose() * &gain + q;
    Ok((symmetrize(&next), gain))
}

/// Max-abs entry of the DARE defect `Ric(P) - P`.
pub fn dare_residual(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<f64> {
    let (next, _) = riccati_step(a, b, q, r, p)?;
    Ok(max_abs(&(next - p)))
}

/// Gain `(R + B'PB)^-1 B'PA` for a given `P`.
pub fn riccati_gain(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<Matrix> {
    Ok(riccati_step(a, b, q, r, p)?.1)
}

fn validate(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<()> {
    ensure_square(a, "A")?;
    let n = a.nrows();
    ensure_shape(b, n, b.ncols(), "B")?;
    ensure_shape(q, n, n, "Q")?;
    ensure_shape(r, b.ncols(), b.ncols(), "R")?;
    for (m, name) in [(a, "A"), (b, "B"), (q, "Q"), (r, "R")] {
        ensure_finite(m, name)?;
    }
    if !is_symmetric(q) || min_eigenvalue(q) < -SYMMETRY_TOL * max_abs(q).max(1.0) {
        return Err(Error::input("Q must be symmetric positive semidefinite"));
    }
    if !is_symmetric(r) || min_eigenvalue(r) < -SYMMETRY_TOL * max_abs(r).max(1.0) {
        return Err(Error::input("R must be symmetric positive semidefinite (indefinite R)"));
    }
    Ok(())
}

fn iterate(
    a: &Matrix,
    b: &Matrix,
    q: &Matrix,
    r: &Matrix,
    p0: Matrix,
    opts: &DareOptions,
) -> Result<RiccatiSolution> {
    let mut p = p0;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let (next, _) = riccati_step(a, b, q, r, &p)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence {
                iterations: it,
                residual,
            });
        }
        residual = max_abs(&(&next - &p));
        p = next;
        if residual <= opts.tol * max_abs(&p).max(1.0) {
            let (_, gain) = riccati_step(a, b, q, r, &p)?;
            let residual = dare_residual(a, b, q, r, &p)?;
            return Ok(RiccatiSolution {
                p,
                gain,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Stabilizing solution of `P = A'PA - A'PB (R + B'PB)^-1 B'PA + Q` by
/// fixed-point iteration of the Riccati map, symmetrizing each step.
///
/// The iteration starts at `P0 = Q`. When that converges to a fixed point
/// whose closed loop `A - B K` is not Schur stable (possible when `(Q, A)`
/// has unstable unobservable modes, e.g. a noise-free unstable mode in the
/// filter problem) it is restarted from the positive definite `Q + s I`,
/// from which the iteration converges to the stabilizing solution whenever
/// one exists. No stabilizing solution ends in [`Error::Synthesis`].
pub fn solve_dare_with(
    a: &Matrix,
    b: &Matrix,
    q: &Matrix,
    r: &Matrix,
    opts: &DareOptions,
) -> Result<RiccatiSolution> {
    validate(a, b, q, r)?;
    let n = a.nrows();

    let first = iterate(a, b, q, r, q.clone(), opts);
    if let Ok(sol) = &first {
        if closed_loop_radius(a, b, &sol.gain)? < 1.0 {
            return Ok(first.unwrap());
        }
    }

    let scale = max_abs(q).max(max_abs(r)).max(1.0);
    let p0 = q + Matrix::identity(n, n) * scale;
    let second = iterate(a, b, q, r, p0, opts);
    match second {
        Ok(sol) => {
            let rho = closed_loop_radius(a, b, &sol.gain)?;
            if rho < 1.0 {
                Ok(sol)
            } else {
                Err(Error::Synthesis(format!(
                    "no stabilizing Riccati solution (closed-loop spectral radius {rho:.6}); \
                     the pair is not stabilizable or has uncontrollable/unobservable modes on the unit circle"
                )))
            }
        }
        Err(e) => match first {
            Err(first_err) => Err(first_err),
            Ok(_) => Err(e),
        },
    }
}

fn closed_loop_radius(a: &Matrix, b: &Matrix, gain: &Matrix) -> Result<f64> {
    spectral_radius(&(a - b * gain))
}

pub fn solve_dare(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<RiccatiSolution> {
    solve_dare_with(a, b, q, r, &DareOptions::default())
}

/// Filter (estimation) Riccati equation, solved as the control DARE of the
/// dual pair `(A', C')`. The returned gain is `L = A P C' (C P C' + V)^-1`,
/// i.e. the transpose of the dual control gain.
pub fn solve_filter_dare_with(
    a: &Matrix,
    c: &Matrix,
    w: &Matrix,
    v: &Matrix,
    opts: &DareOptions,
) -> Result<RiccatiSolution> {
    let dual = solve_dare_with(&a.transpose(), &c.transpose(), w, v, opts)?;
    Ok(RiccatiSolution {
        gain: dual.gain.transpose(),
        ..dual
    })
}

pub fn solve_filter_dare(a: &Matrix, c: &Matrix, w: &Matrix, v: &Matrix) -> Result<RiccatiSolution> {
    solve_filter_dare_with(a, c, w, v, &DareOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, v)
    }

    fn s(x: f64) -> Matrix {
        m(1, 1, &[x])
    }

    #[test]
    fn zero_pole_needs_no_control() {
        let sol = solve_dare(&s(0.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        assert_eq!(sol.p[(0, 0)], 1.0);
        assert_eq!(sol.gain[(0, 0)], 0.0);
    }

    #[test]
    fn golden_ratio() {
        // P^2 - P - 1 = 0 for a = b = q = r = 1
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let sol = solve_dare(&s(1.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        assert!((sol.p[(0, 0)] - phi).abs() < 1e-10);
        assert!((sol.gain[(0, 0)] - (phi - 1.0)).abs() < 1e-10);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn filter_on_one_step_delay_chain() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let a = m(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let c = m(1, 2, &[0.0, 1.0]);
        let w = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let sol = solve_filter_dare(&a, &c, &w, &s(1.0)).unwrap();
        assert!((sol.p[(0, 1)] - phi).abs() < 1e-10);
        let l2 = phi / (phi + 1.0);
        assert!((sol.gain[(1, 0)] - l2).abs() < 1e-8);
        assert!((sol.gain[(0, 0)] - l2).abs() < 1e-8);
    }

    #[test]
    fn filter_gain_vanishes_for_zero_pole() {
        let sol = solve_filter_dare(&s(0.0), &s(1.0), &s(4.0), &s(9.0)).unwrap();
        assert_eq!(sol.gain[(0, 0)], 0.0);
    }

    #[test]
    fn noise_free_unstable_mode_gets_stabilizing_solution() {
        // Scalar filter with W = 0 and a = 2: P = (a^2 - 1) V is the
        // stabilizing root; P = 0 is the other fixed point.
        let sol = solve_filter_dare(&s(2.0), &s(1.0), &s(0.0), &s(1.0)).unwrap();
        assert!((sol.p[(0, 0)] - 3.0).abs() < 1e-10);
        assert!((2.0 - sol.gain[(0, 0)]).abs() < 1.0);
    }

    #[test]
    fn indefinite_r_rejected() {
        let err = solve_dare(&s(1.0), &s(1.0), &s(1.0), &s(-1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn unstabilizable_pair_is_reported() {
        let a = m(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let b = m(2, 1, &[0.0, 1.0]);
        let err = solve_dare(&a, &b, &Matrix::identity(2, 2), &s(1.0)).unwrap_err();
        assert!(matches!(err, Error::Synthesis(_) | Error::NonConvergence { .. }), "{err:?}");
    }

    #[test]
    fn iteration_cap_reports_last_residual() {
        let opts = DareOptions {
            tol: 1e-12,
            max_iterations: 2,
        };
        let err = solve_dare_with(&s(0.99), &s(1.0), &s(1.0), &s(100.0), &opts).unwrap_err();
        match err {
            Error::NonConvergence { iterations, residual } => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0 && residual.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
