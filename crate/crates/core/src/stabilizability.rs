//! How unstable a plant can be behind a delay chain when the controller may
//! only use its forward gain `l_1` (all `l_i = 0, i >= 2`).
//!
//! With `L = l_1 e_1` the estimator matrix `A - L C` has characteristic
//! polynomial `lambda^(Td+1) - a lambda^Td + l_1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{observability_matrix, spectral_radius, Matrix, Vector};
use crate::plant::{delay_chain_plant, DelaySpec};

/// Bounds of the dense `l_1` grid.
pub const GAIN_RANGE: (f64, f64) = (-4.0, 4.0);
pub const GAIN_STEP: f64 = 1e-3;
/// Bisection bracket for `|a|`.
pub const A_BRACKET: (f64, f64) = (1.0, 4.0);

/// A loop counts as stable when its spectral radius is below `1 - STABILITY_MARGIN`,
/// so boundary points with a unit-modulus root do not pass on rounding noise.
pub const STABILITY_MARGIN: f64 = 1e-9;

const GOLDEN_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoDpfCheck {
    pub stabilizable: bool,
    /// Best `l_1` found, present when it stabilizes.
    pub witness: Option<f64>,
    /// Minimizing `l_1`, stabilizing or not.
    pub best_gain: f64,
    /// Spectral radius of `A - l_1 e_1 C` at the best `l_1`.
    pub best_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizabilityResult {
    pub td: usize,
    pub max_abs_a: f64,
    /// Stabilizing `l_1` at `witness_a`.
    pub witness_gain: f64,
    /// Largest `|a|` known to be stabilizable, within the tolerance of `max_abs_a`.
    pub witness_a: f64,
    pub bisection_tolerance: f64,
}

/// `A - l_1 e_1 C` for the delay chain.
pub fn no_dpf_loop(a: f64, td: usize, l1: f64) -> Result<Matrix> {
    let lp = delay_chain_plant(&DelaySpec::new(td, a, 1.0, 1.0).with_full_actuation(false))?;
    let mut m = lp.plant.a;
    m[(0, td)] -= l1;
    Ok(m)
}

fn radius(a: f64, td: usize, l1: f64) -> f64 {
    no_dpf_loop(a, td, l1)
        .and_then(|m| spectral_radius(&m))
        .unwrap_or(f64::INFINITY)
}

/// Dense grid over `l_1`, refined by golden-section search around the best point.
pub fn is_stabilizable_without_dpf(a: f64, td: usize) -> Result<NoDpfCheck> {
    if td == 0 {
        return Err(Error::input("net delay must be at least one step"));
    }
    if !a.is_finite() {
        return Err(Error::input("a must be finite"));
    }
    let (lo, hi) = GAIN_RANGE;
    let steps = ((hi - lo) / GAIN_STEP).round() as usize;
    let (best_i, mut best_r) = (0..=steps)
        .into_par_iter()
        .map(|i| (i, radius(a, td, lo + i as f64 * GAIN_STEP)))
        .reduce(
            || (0, f64::INFINITY),
            |x, y| if y.1 < x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x },
        );
    let mut best_l = lo + best_i as f64 * GAIN_STEP;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x0, mut x3) = ((best_l - GAIN_STEP).max(lo), (best_l + GAIN_STEP).min(hi));
    let mut x1 = x3 - inv_phi * (x3 - x0);
    let mut x2 = x0 + inv_phi * (x3 - x0);
    let (mut f1, mut f2) = (radius(a, td, x1), radius(a, td, x2));
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - inv_phi * (x3 - x0);
            f1 = radius(a, td, x1);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + inv_phi * (x3 - x0);
            f2 = radius(a, td, x2);
        }
    }
    for (l, r) in [(x1, f1), (x2, f2)] {
        if r < best_r {
            best_l = l;
            best_r = r;
        }
    }
    let stabilizable = best_r < 1.0 - STABILITY_MARGIN;
    Ok(NoDpfCheck {
        stabilizable,
        witness: stabilizable.then_some(best_l),
        best_gain: best_l,
        best_radius: best_r,
    })
}

/// Bisection on `|a|` over [`A_BRACKET`] until the bracket is narrower than `tol`.
pub fn max_stabilizable_a(td: usize, tol: f64) -> Result<StabilizabilityResult> {
    if td == 0 {
        return Err(Error::input("net delay must be at least one step"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::input("bisection tolerance must be positive"));
    }
    let (mut lo, mut hi) = A_BRACKET;
    let mut witness = is_stabilizable_without_dpf(lo, td)?
        .witness
        .ok_or_else(|| Error::Synthesis(format!("|a| = {lo} is not stabilizable at Td = {td}")))?;
    if is_stabilizable_without_dpf(hi, td)?.stabilizable {
        return Err(Error::Synthesis(format!("|a| = {hi} is stabilizable at Td = {td}; bracket too small")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let check = is_stabilizable_without_dpf(mid, td)?;
        match check.witness {
            Some(l1) => {
                lo = mid;
                witness = l1;
            }
            None => hi = mid,
        }
    }
    Ok(StabilizabilityResult {
        td,
        max_abs_a: 0.5 * (lo + hi),
        witness_gain: witness,
        witness_a: lo,
        bisection_tolerance: tol,
    })
}

/// Single-output Ackermann gain placing every eigenvalue of `A - L C` at zero:
/// `L = A^n O^-1 e_n` with `O` the observability matrix.
pub fn deadbeat_observer_gain(a: &Matrix, c: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if c.nrows() != 1 || c.ncols() != n {
        return Err(Error::dim("deadbeat placement needs a single output row"));
    }
    let o = observability_matrix(a, c);
    let mut e_n = Vector::zeros(n);
    e_n[n - 1] = 1.0;
    let col = o
        .lu()
        .solve(&e_n)
        .ok_or_else(|| Error::Precondition("(C, A) is not observable; eigenvalues cannot be placed".into()))?;
    let an = a.pow(n as u32);
    let l = an * col;
    Ok(Matrix::from_column_slice(n, 1, l.as_slice()))
}

/// Places all eigenvalues of `A - L C` at zero with a full `L` (DPF allowed)
/// and reports whether the result is deadbeat to 1e-9.
pub fn dpf_stabilizes_everything(a: f64, td: usize) -> Result<bool> {
    let lp = delay_chain_plant(&DelaySpec::new(td, a, 1.0, 1.0).with_full_actuation(false))?;
    let p = &lp.plant;
    let l = deadbeat_observer_gain(&p.a, &p.c)?;
    Ok(spectral_radius(&(&p.a - &l * &p.c))? < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Schur-Cohn: all roots of `sum c[i] z^i` strictly inside the unit disk.
    fn schur_stable(coeffs: &[f64]) -> bool {
        let mut c = coeffs.to_vec();
        while c.len() > 1 {
            let n = c.len() - 1;
            let k = c[0] / c[n];
            if k.abs() >= 1.0 {
                return false;
            }
            c = (0..n).map(|i| c[i + 1] - k * c[n - 1 - i]).collect();
        }
        true
    }

    fn no_dpf_poly(a: f64, td: usize, l1: f64) -> Vec<f64> {
        let mut c = vec![0.0; td + 2];
        c[0] = l1;
        c[td] = -a;
        c[td + 1] = 1.0;
        c
    }

    #[test]
    fn schur_cohn_sanity() {
        assert!(schur_stable(&[0.25, 0.0, 1.0]));
        assert!(!schur_stable(&[-1.0, 0.0, 1.0]));
        assert!(!schur_stable(&[0.0, -2.0, 1.0]));
    }

    #[test]
    fn one_step_examples() {
        assert!(is_stabilizable_without_dpf(1.9, 1).unwrap().stabilizable);
        assert!(!is_stabilizable_without_dpf(2.0, 1).unwrap().stabilizable);
        assert!(!is_stabilizable_without_dpf(1.5, 2).unwrap().stabilizable);
        assert!(is_stabilizable_without_dpf(1.4, 2).unwrap().stabilizable);
    }

    #[test]
    fn witness_agrees_with_schur_cohn() {
        for td in 1..=4 {
            for a in [-1.8, -1.1, 0.5, 1.1, 1.3] {
                let chk = is_stabilizable_without_dpf(a, td).unwrap();
                if let Some(l1) = chk.witness {
                    assert!(schur_stable(&no_dpf_poly(a, td, l1)), "a={a} td={td} l1={l1}");
                }
            }
        }
    }

    #[test]
    fn grid_oracle_agrees_on_stabilizability() {
        // brute force over (a, l1) with the Schur-Cohn test
        for td in 1..=3 {
            for i in 0..12 {
                let a = 1.0 + 0.1 * i as f64;
                let oracle = (0..=4000).any(|j| schur_stable(&no_dpf_poly(a, td, -2.0 + j as f64 * 1e-3)));
                let ours = is_stabilizable_without_dpf(a, td).unwrap().stabilizable;
                let boundary = (td as f64 + 1.0) / td as f64;
                if (a - boundary).abs() > 1e-3 {
                    assert_eq!(ours, oracle, "a={a} td={td}");
                }
            }
        }
    }

    #[test]
    fn boundaries() {
        for (td, expected) in [(1, 2.0), (2, 1.5), (3, 4.0 / 3.0), (4, 1.25)] {
            let res = max_stabilizable_a(td, 1e-4).unwrap();
            assert!((res.max_abs_a - expected).abs() < 1e-3, "td={td}: {}", res.max_abs_a);
            assert!(schur_stable(&no_dpf_poly(res.witness_a, td, res.witness_gain)));
        }
    }

    #[test]
    fn rejects_zero_delay() {
        assert!(is_stabilizable_without_dpf(1.0, 0).is_err());
        assert!(max_stabilizable_a(0, 1e-3).is_err());
        assert!(max_stabilizable_a(1, 0.0).is_err());
    }

    #[test]
    fn deadbeat_gain_is_geometric() {
        let lp = delay_chain_plant(&DelaySpec::new(2, 3.0, 1.0, 1.0)).unwrap();
        let l = deadbeat_observer_gain(&lp.plant.a, &lp.plant.c).unwrap();
        assert_eq!(l.as_slice(), &[27.0, 9.0, 3.0]);
    }

    #[test]
    fn deadbeat_everywhere() {
        for a in [3.0, 10.0, -0.5, 0.5, -2.0, 2.0, -5.0, 5.0, 2.5] {
            for td in 1..=6 {
                assert!(dpf_stabilizes_everything(a, td).unwrap(), "a={a} td={td}");
            }
        }
    }
}
