use super::{ensure_finite, ensure_shape, max_abs, symmetrize, Matrix, Vector};
use crate::error::{Error, Result};

/// Relative feasibility tolerance on `|E z - f|`.
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    pub x: Vector,
    /// Lagrange multipliers `lambda` with `W x + E' lambda = 0`.
    pub multipliers: Vector,
    pub objective: f64,
    /// Max-abs constraint violation.
    pub primal_residual: f64,
    /// Max-abs stationarity violation on the free variables.
    pub dual_residual: f64,
}

impl LsqSolution {
    pub fn kkt_residual(&self) -> f64 {
        self.primal_residual.max(self.dual_residual)
    }
}

/// Minimize `x' W x` subject to `E x = f` and `x_i = 0` wherever
/// `zero_mask[i]` is set.
///
/// Null-space method: the masked columns are dropped, a particular solution
/// and an orthonormal null-space basis of the reduced constraint matrix come
/// from one SVD, and the reduced Hessian `N' W N` is solved by Cholesky.
/// Rank-deficient but consistent constraint systems are accepted.
pub fn lsq_equality(weights: &Matrix, constraints: &Matrix, rhs: &Vector, zero_mask: &[bool]) -> Result<LsqSolution> {
    let nvar = weights.nrows();
    ensure_shape(weights, nvar, nvar, "objective weights")?;
    ensure_shape(constraints, rhs.len(), nvar, "constraint matrix")?;
    if zero_mask.len() != nvar {
        return Err(Error::dim(format!(
            "zero mask has {} entries for {nvar} variables",
            zero_mask.len()
        )));
    }
    ensure_finite(weights, "objective weights")?;
    ensure_finite(constraints, "constraint matrix")?;
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("constraint rhs has non-finite entries"));
    }

    let free: Vec<usize> = (0..nvar).filter(|&i| !zero_mask[i]).collect();
    let nrow = constraints.nrows();
    let nfree = free.len();

    let e = constraints.select_columns(&free);
    let w = symmetrize(&weights.select_rows(&free).select_columns(&free));

    // Square up a wide system so the SVD returns a full right basis.
    let dim = nrow.max(nfree);
    let mut padded = Matrix::zeros(dim, nfree);
    padded.view_mut((0, 0), (nrow, nfree)).copy_from(&e);

    let (z, multipliers) = if nfree == 0 {
        (Vector::zeros(0), Vector::zeros(nrow))
    } else {
        let svd = padded.svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested V'");
        let sv = &svd.singular_values;
        let smax = sv.max();
        let cutoff = dim as f64 * f64::EPSILON * smax;
        let rank = sv.iter().filter(|&&s| s > cutoff).count();

        // particular solution z0 = V S^+ U' f
        let mut f_pad = Vector::zeros(dim);
        f_pad.rows_mut(0, nrow).copy_from(rhs);
        let utf = u.transpose() * &f_pad;
        let mut z0 = Vector::zeros(nfree);
        for k in 0..rank {
            z0 += vt.row(k).transpose() * (utf[k] / sv[k]);
        }

        let null = vt.rows(rank, nfree - rank).transpose();
        let z = if null.ncols() == 0 {
            z0
        } else {
            let h = symmetrize(&(null.transpose() * &w * &null));
            let g = null.transpose() * (&w * &z0);
            let chol = nalgebra::Cholesky::new(h).ok_or_else(|| {
                Error::input("objective weights are not positive definite on the feasible set")
            })?;
            let y = chol.solve(&(-g));
            z0 + &null * y
        };

        // multipliers from E' lambda = -W z, in the least-squares sense
        let wz = &w * &z;
        let vtwz = vt * &wz;
        let mut mu = Vector::zeros(dim);
        for k in 0..rank {
            mu -= u.column(k) * (vtwz[k] / sv[k]);
        }
        (z, mu.rows(0, nrow).into_owned())
    };

    let violation = &e * &z - rhs;
    let (row, worst) = violation
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
    let scale = 1.0_f64
        .max(max_abs(&Matrix::from_column_slice(rhs.len(), 1, rhs.as_slice())))
        .max(max_abs(&e) * z.amax());
    if worst > FEASIBILITY_TOL * scale {
        return Err(Error::Infeasible {
            column: None,
            row,
            violation: worst,
        });
    }

    let dual = &w * &z + e.transpose() * &multipliers;
    let mut x = Vector::zeros(nvar);
    for (k, &i) in free.iter().enumerate() {
        x[i] = z[k];
    }
    let objective = (x.transpose() * weights * &x)[(0, 0)];

    Ok(LsqSolution {
        objective,
        multipliers,
        primal_residual: worst,
        dual_residual: if dual.is_empty() { 0.0 } else { dual.amax() },
        x,
    })
}
