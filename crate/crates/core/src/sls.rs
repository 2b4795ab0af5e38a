//! Finite-impulse-response System Level Synthesis for state feedback.
//!
//! The closed-loop maps from disturbance to state and input are
//! `Phi_x = sum_k Phi_x^(k) z^-k`, `Phi_u = sum_k Phi_u^(k) z^-k`, `k = 1..T`.
//! They are achievable when
//!
//! ```text
//! Phi_x^(1) = I
//! Phi_x^(k+1) = A Phi_x^(k) + B Phi_u^(k)     k = 1..T-1
//!           0 = A Phi_x^(T) + B Phi_u^(T)
//! ```
//!
//! and the H2 cost `sum_k |Q^1/2 Phi_x^(k)|_F^2 + |R^1/2 Phi_u^(k)|_F^2`
//! separates over columns, one equality-constrained least squares each.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::controllers::{
    ControllerKind, ControllerParams, ControllerRealization, DimensionReport, OfOptions,
};
use crate::error::{Error, Result};
use crate::numerics::{
    block_diag, ensure_finite, ensure_shape, ensure_square, is_psd, lsq_equality, max_abs, rank, Matrix,
    Vector,
};
use crate::plant::StateSpace;

/// Per-entry structural zero pattern; `true` forces the entry to zero.
pub type Mask = DMatrix<bool>;

/// Minimum signaling delay, in steps, between each pair of signals.
/// Entry `(i, j)` of `Phi^(k)` is forced to zero whenever `k <= delay(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayMask {
    /// `n x n`: from disturbance on state `j` to state `i`.
    pub state_delay: DMatrix<usize>,
    /// `m x n`: from disturbance on state `j` to input `i`.
    pub input_delay: DMatrix<usize>,
}

impl DelayMask {
    pub fn none(n: usize, m: usize) -> Self {
        DelayMask {
            state_delay: DMatrix::zeros(n, n),
            input_delay: DMatrix::zeros(m, n),
        }
    }

    /// The same delay on every input entry, none on states.
    pub fn uniform_input(n: usize, m: usize, delay: usize) -> Self {
        DelayMask {
            state_delay: DMatrix::zeros(n, n),
            input_delay: DMatrix::from_element(m, n, delay),
        }
    }

    /// Zero patterns for components `k = 1..=horizon`.
    pub fn component_masks(&self, horizon: usize) -> (Vec<Mask>, Vec<Mask>) {
        let expand = |d: &DMatrix<usize>| -> Vec<Mask> {
            (1..=horizon).map(|k| d.map(|delay| k <= delay)).collect()
        };
        (expand(&self.state_delay), expand(&self.input_delay))
    }
}

/// FIR closed-loop responses. `phi_x[k]` and `phi_u[k]` hold the
/// coefficient of `z^-(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlsResponse {
    pub phi_x: Vec<Matrix>,
    pub phi_u: Vec<Matrix>,
    pub mask_x: Vec<Mask>,
    pub mask_u: Vec<Mask>,
}

impl SlsResponse {
    /// Checks shapes, finiteness, `Phi_x^(1) = I` and mask zeros. Achievability
    /// against a plant is a separate question, see [`check_achievability`].
    pub fn new(phi_x: Vec<Matrix>, phi_u: Vec<Matrix>, mask_x: Vec<Mask>, mask_u: Vec<Mask>) -> Result<Self> {
        let t = phi_x.len();
        if t == 0 {
            return Err(Error::input("SLS horizon must be at least 1"));
        }
        if phi_u.len() != t || mask_x.len() != t || mask_u.len() != t {
            return Err(Error::dim(format!(
                "horizon {t} but {} input, {} state-mask and {} input-mask components",
                phi_u.len(),
                mask_x.len(),
                mask_u.len()
            )));
        }
        let n = phi_x[0].nrows();
        let m = phi_u[0].nrows();
        for k in 0..t {
            ensure_shape(&phi_x[k], n, n, &format!("phi_x.{}", k + 1))?;
            ensure_shape(&phi_u[k], m, n, &format!("phi_u.{}", k + 1))?;
            ensure_finite(&phi_x[k], &format!("phi_x.{}", k + 1))?;
            ensure_finite(&phi_u[k], &format!("phi_u.{}", k + 1))?;
            if mask_x[k].shape() != (n, n) || mask_u[k].shape() != (m, n) {
                return Err(Error::dim(format!("mask {} has the wrong shape", k + 1)));
            }
            let masked_nonzero = phi_x[k].zip_map(&mask_x[k], |v, z| z && v != 0.0).iter().any(|&b| b)
                || phi_u[k].zip_map(&mask_u[k], |v, z| z && v != 0.0).iter().any(|&b| b);
            if masked_nonzero {
                return Err(Error::input(format!("component {} is nonzero on a masked entry", k + 1)));
            }
        }
        if phi_x[0] != Matrix::identity(n, n) {
            return Err(Error::input("phi_x.1 must be the identity"));
        }
        Ok(SlsResponse {
            phi_x,
            phi_u,
            mask_x,
            mask_u,
        })
    }

    pub fn unmasked(phi_x: Vec<Matrix>, phi_u: Vec<Matrix>) -> Result<Self> {
        let n = phi_x.first().map_or(0, |p| p.nrows());
        let m = phi_u.first().map_or(0, |p| p.nrows());
        let mask_x = vec![Mask::from_element(n, n, false); phi_x.len()];
        let mask_u = vec![Mask::from_element(m, n, false); phi_u.len()];
        Self::new(phi_x, phi_u, mask_x, mask_u)
    }

    pub fn horizon(&self) -> usize {
        self.phi_x.len()
    }

    pub fn n(&self) -> usize {
        self.phi_x[0].nrows()
    }

    pub fn m(&self) -> usize {
        self.phi_u[0].nrows()
    }

    /// H2 cost of the response to a unit disturbance on each state, one entry per column.
    pub fn column_costs(&self, q: &Matrix, r: &Matrix) -> Vec<f64> {
        (0..self.n())
            .map(|j| {
                let mut cost = 0.0;
                for k in 0..self.horizon() {
                    let x = self.phi_x[k].column(j);
                    let u = self.phi_u[k].column(j);
                    cost += (x.transpose() * q * x)[(0, 0)] + (u.transpose() * r * u)[(0, 0)];
                }
                cost
            })
            .collect()
    }

    pub fn h2_cost(&self, q: &Matrix, r: &Matrix) -> f64 {
        self.column_costs(q, r).iter().sum()
    }
}

/// Minimize the H2 cost over achievable FIR responses of length `horizon`
/// that respect `mask`.
pub fn synthesize(
    plant: &StateSpace,
    horizon: usize,
    q: &Matrix,
    r: &Matrix,
    mask: Option<&DelayMask>,
) -> Result<SlsResponse> {
    let (a, b) = (&plant.a, &plant.b);
    let n = plant.n();
    let m = plant.m();
    if horizon == 0 {
        return Err(Error::input("SLS horizon must be at least 1"));
    }
    ensure_square(q, "Q")?;
    ensure_shape(q, n, n, "Q")?;
    ensure_shape(r, m, m, "R")?;
    if !is_psd(q) || !is_psd(r) {
        return Err(Error::input("Q and R must be symmetric PSD"));
    }
    if rank(b) < m {
        return Err(Error::Precondition("SLS requires B with full column rank".into()));
    }
    let delays = match mask {
        Some(d) => {
            if d.state_delay.shape() != (n, n) || d.input_delay.shape() != (m, n) {
                return Err(Error::dim(format!(
                    "delay mask is {:?}/{:?}, plant needs ({n}, {n})/({m}, {n})",
                    d.state_delay.shape(),
                    d.input_delay.shape()
                )));
            }
            d.clone()
        }
        None => DelayMask::none(n, m),
    };
    let (mask_x, mask_u) = delays.component_masks(horizon);

    // Variables per column: x_2..x_T then u_1..u_T.
    let nx = n * (horizon - 1);
    let nvar = nx + m * horizon;
    let xoff = |k: usize| (k - 2) * n;
    let uoff = |k: usize| nx + (k - 1) * m;

    let mut e = Matrix::zeros(n * horizon, nvar);
    for k in 1..=horizon {
        let row = (k - 1) * n;
        if k < horizon {
            // x_{k+1} - A x_k - B u_k = [A e_j if k == 1]
            e.view_mut((row, xoff(k + 1)), (n, n)).copy_from(&Matrix::identity(n, n));
            if k >= 2 {
                e.view_mut((row, xoff(k)), (n, n)).copy_from(&(-a));
            }
            e.view_mut((row, uoff(k)), (n, m)).copy_from(&(-b));
        } else {
            // A x_T + B u_T = [-A e_j if T == 1]
            if k >= 2 {
                e.view_mut((row, xoff(k)), (n, n)).copy_from(a);
            }
            e.view_mut((row, uoff(k)), (n, m)).copy_from(b);
        }
    }
    let mut blocks: Vec<&Matrix> = vec![q; horizon - 1];
    blocks.extend(std::iter::repeat_n(r, horizon));
    let w = block_diag(&blocks);

    let columns: Vec<Result<(Vector, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            if mask_x[0][(j, j)] {
                return Err(Error::Infeasible {
                    column: Some(j),
                    row: j,
                    violation: 1.0,
                });
            }
            let ae = a.column(j).into_owned();
            let mut f = Vector::zeros(n * horizon);
            if horizon == 1 {
                f.rows_mut(0, n).copy_from(&(-ae));
            } else {
                f.rows_mut(0, n).copy_from(&ae);
            }
            let mut zero = vec![false; nvar];
            for k in 2..=horizon {
                for i in 0..n {
                    zero[xoff(k) + i] = mask_x[k - 1][(i, j)];
                }
            }
            for k in 1..=horizon {
                for i in 0..m {
                    zero[uoff(k) + i] = mask_u[k - 1][(i, j)];
                }
            }
            let sol = lsq_equality(&w, &e, &f, &zero).map_err(|err| match err {
                Error::Infeasible { row, violation, .. } => Error::Infeasible {
                    column: Some(j),
                    row,
                    violation,
                },
                other => other,
            })?;
            Ok((sol.x, sol.objective))
        })
        .collect();

    let mut phi_x = vec![Matrix::identity(n, n)];
    phi_x.extend((1..horizon).map(|_| Matrix::zeros(n, n)));
    let mut phi_u = vec![Matrix::zeros(m, n); horizon];
    for (j, col) in columns.into_iter().enumerate() {
        let (z, _) = col?;
        for k in 2..=horizon {
            phi_x[k - 1].column_mut(j).copy_from(&z.rows(xoff(k), n));
        }
        for k in 1..=horizon {
            phi_u[k - 1].column_mut(j).copy_from(&z.rows(uoff(k), m));
        }
    }
    // masked entries come back as exact zeros from the solver; keep it explicit
    for k in 0..horizon {
        phi_x[k].zip_apply(&mask_x[k], |v, z| {
            if z && k > 0 {
                *v = 0.0
            }
        });
        phi_u[k].zip_apply(&mask_u[k], |v, z| {
            if z {
                *v = 0.0
            }
        });
    }
    SlsResponse::new(phi_x, phi_u, mask_x, mask_u)
}

/// Build the executable controller for a response.
pub fn make_sls_controller(resp: &SlsResponse) -> Result<ControllerRealization> {
    ControllerRealization::from_params(
        ControllerKind::Sls,
        ControllerParams::Sls(resp.clone()),
        None,
        OfOptions::default(),
    )
}

/// Max-abs residuals of the achievability conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AchievabilityReport {
    /// `|Phi_x^(1) - I|`.
    pub identity: f64,
    /// `recursion[k-1] = |Phi_x^(k+1) - A Phi_x^(k) - B Phi_u^(k)|` for `k = 1..T-1`.
    pub recursion: Vec<f64>,
    /// `|A Phi_x^(T) + B Phi_u^(T)|`.
    pub terminal: f64,
    /// Largest magnitude on a masked entry.
    pub mask: f64,
}

impl AchievabilityReport {
    pub fn max_residual(&self) -> f64 {
        self.recursion
            .iter()
            .copied()
            .fold(self.identity.max(self.terminal).max(self.mask), f64::max)
    }
}

pub fn check_achievability(resp: &SlsResponse, plant: &StateSpace) -> Result<AchievabilityReport> {
    let (a, b) = (&plant.a, &plant.b);
    if resp.n() != plant.n() || resp.m() != plant.m() {
        return Err(Error::dim(format!(
            "response is for n={}, m={} but plant has n={}, m={}",
            resp.n(),
            resp.m(),
            plant.n(),
            plant.m()
        )));
    }
    let t = resp.horizon();
    let identity = max_abs(&(&resp.phi_x[0] - Matrix::identity(resp.n(), resp.n())));
    let recursion = (0..t - 1)
        .map(|k| max_abs(&(&resp.phi_x[k + 1] - a * &resp.phi_x[k] - b * &resp.phi_u[k])))
        .collect();
    let terminal = max_abs(&(a * &resp.phi_x[t - 1] + b * &resp.phi_u[t - 1]));
    let mut mask: f64 = 0.0;
    for k in 0..t {
        for (v, z) in resp.phi_x[k].iter().zip(resp.mask_x[k].iter()) {
            if *z && k > 0 {
                mask = mask.max(v.abs());
            }
        }
        for (v, z) in resp.phi_u[k].iter().zip(resp.mask_u[k].iter()) {
            if *z {
                mask = mask.max(v.abs());
            }
        }
    }
    Ok(AchievabilityReport {
        identity,
        recursion,
        terminal,
        mask,
    })
}

/// Forward size `n`; feedback size `n (T - 1)`, one `n`-vector per buffered
/// disturbance estimate feeding the prediction block.
pub fn report_signal_dims(resp: &SlsResponse) -> DimensionReport {
    DimensionReport {
        forward_dim: resp.n(),
        feedback_dim: resp.n() * (resp.horizon() - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::extract_dpf;
    use crate::numerics::solve_dare;
    use crate::plant::scalar_plant;

    fn s(x: f64) -> Matrix {
        Matrix::from_element(1, 1, x)
    }

    fn three_state() -> StateSpace {
        let a = Matrix::from_row_slice(3, 3, &[1.1, 0.3, 0.0, 0.2, 0.9, 0.4, 0.0, 0.5, 1.2]);
        let b = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let i = Matrix::identity(3, 3);
        StateSpace::new(a, b, i.clone(), i, Matrix::zeros(3, 3)).unwrap()
    }

    #[test]
    fn scalar_two_tap_optimum() {
        let p = scalar_plant(1.0, 1.0, 0.0).unwrap();
        let resp = synthesize(&p, 2, &s(1.0), &s(1.0), None).unwrap();
        assert!((resp.phi_u[0][(0, 0)] + 2.0 / 3.0).abs() < 1e-12);
        assert!((resp.phi_x[1][(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((resp.phi_u[1][(0, 0)] + 1.0 / 3.0).abs() < 1e-12);
        assert!((resp.h2_cost(&s(1.0), &s(1.0)) - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn delayed_deadbeat_under_input_mask() {
        for a in [0.5, 1.0, -2.0] {
            let p = scalar_plant(a, 1.0, 0.0).unwrap();
            let mask = DelayMask::uniform_input(1, 1, 1);
            let resp = synthesize(&p, 2, &s(1.0), &s(1.0), Some(&mask)).unwrap();
            assert_eq!(resp.phi_u[0][(0, 0)], 0.0);
            assert!((resp.phi_x[1][(0, 0)] - a).abs() < 1e-12);
            assert!((resp.phi_u[1][(0, 0)] + a * a).abs() < 1e-12);
        }
    }

    #[test]
    fn single_tap_is_deadbeat() {
        let p = three_state();
        let sq = StateSpace::new(p.a.clone(), Matrix::identity(3, 3), p.c.clone(), p.w.clone(), p.v.clone()).unwrap();
        let resp = synthesize(&sq, 1, &Matrix::identity(3, 3), &Matrix::identity(3, 3), None).unwrap();
        assert!((&resp.phi_u[0] + &sq.a).amax() < 1e-12);
        let ctrl = make_sls_controller(&resp).unwrap();
        assert!(extract_dpf(&ctrl).is_empty());
        assert_eq!(report_signal_dims(&resp), DimensionReport { forward_dim: 3, feedback_dim: 0 });
    }

    #[test]
    fn single_tap_infeasible_with_thin_b() {
        let err = synthesize(&three_state(), 1, &Matrix::identity(3, 3), &Matrix::identity(2, 2), None).unwrap_err();
        assert!(matches!(err, Error::Infeasible { column: Some(_), .. }), "{err}");
        assert!(err.to_string().contains("column"));
    }

    #[test]
    fn residuals_vanish_on_synthesized_responses() {
        let p = three_state();
        for t in [2, 3, 10] {
            let resp = synthesize(&p, t, &Matrix::identity(3, 3), &Matrix::identity(2, 2), None).unwrap();
            let rep = check_achievability(&resp, &p).unwrap();
            assert!(rep.max_residual() <= 1e-9, "T={t}: {rep:?}");
            assert_eq!(rep.recursion.len(), t - 1);
        }
    }

    #[test]
    fn corruption_shows_in_residuals() {
        let p = scalar_plant(1.0, 1.0, 0.0).unwrap();
        let mut resp = synthesize(&p, 3, &s(1.0), &s(1.0), None).unwrap();
        resp.phi_x[1][(0, 0)] += 0.1;
        let rep = check_achievability(&resp, &p).unwrap();
        assert!(rep.recursion[0] >= 0.1 - 1e-12 || rep.recursion[1] >= 0.1 - 1e-12);
    }

    #[test]
    fn diagonal_identity_mask_is_infeasible() {
        let p = scalar_plant(1.0, 1.0, 0.0).unwrap();
        let mask = DelayMask {
            state_delay: DMatrix::from_element(1, 1, 1),
            input_delay: DMatrix::zeros(1, 1),
        };
        let err = synthesize(&p, 3, &s(1.0), &s(1.0), Some(&mask)).unwrap_err();
        assert_eq!(err, Error::Infeasible { column: Some(0), row: 0, violation: 1.0 });
    }

    #[test]
    fn rank_deficient_b_rejected() {
        let p = StateSpace::new(
            Matrix::identity(2, 2),
            Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            Matrix::zeros(2, 2),
        )
        .unwrap();
        let err = synthesize(&p, 3, &Matrix::identity(2, 2), &Matrix::identity(2, 2), None).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn long_horizon_approaches_lqr() {
        let p = scalar_plant(0.9, 1.0, 0.0).unwrap();
        let lqr = solve_dare(&p.a, &p.b, &s(1.0), &s(1.0)).unwrap().p[(0, 0)];
        let mut prev = f64::INFINITY;
        for t in [2, 5, 10, 20, 50] {
            let cost = synthesize(&p, t, &s(1.0), &s(1.0), None).unwrap().h2_cost(&s(1.0), &s(1.0));
            assert!(cost <= prev + 1e-12);
            prev = cost;
        }
        assert!((prev - lqr).abs() < 1e-4);
    }

    #[test]
    fn dims() {
        let p = scalar_plant(1.0, 1.0, 0.0).unwrap();
        let resp = synthesize(&p, 3, &s(1.0), &s(1.0), None).unwrap();
        assert_eq!(report_signal_dims(&resp), DimensionReport { forward_dim: 1, feedback_dim: 2 });
        let sq = StateSpace::new(
            Matrix::from_fn(4, 4, |i, j| if i == j { 0.5 } else { 0.1 }),
            Matrix::identity(4, 4),
            Matrix::identity(4, 4),
            Matrix::identity(4, 4),
            Matrix::zeros(4, 4),
        )
        .unwrap();
        let resp = synthesize(&sq, 2, &Matrix::identity(4, 4), &Matrix::identity(4, 4), None).unwrap();
        assert_eq!(report_signal_dims(&resp), DimensionReport { forward_dim: 4, feedback_dim: 4 });
    }

    #[test]
    fn constructor_rejects_bad_identity_and_mask() {
        assert!(SlsResponse::unmasked(vec![s(2.0)], vec![s(-1.0)]).is_err());
        let masked = SlsResponse::new(
            vec![s(1.0), s(0.5)],
            vec![s(-0.5), s(-0.5)],
            vec![Mask::from_element(1, 1, false); 2],
            vec![Mask::from_element(1, 1, true), Mask::from_element(1, 1, false)],
        );
        assert!(masked.is_err());
    }
}
